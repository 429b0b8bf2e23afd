#include "rbb/composition.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "rbb/error.hpp"

namespace rbb {

namespace {

void check_labels(const Labels& labels, Eigen::Index expected, const char* what) {
    if (static_cast<Eigen::Index>(labels.size()) != expected) {
        fail(ErrorKind::DimensionMismatch, std::string(what) + " label count " + std::to_string(labels.size()) +
                                               " does not match matrix dimension " + std::to_string(expected));
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) fail(ErrorKind::InvalidArgument, std::string("duplicate ") + what + " id '" + l + "'");
    }
}

void check_shape(const Eigen::MatrixXd& v) {
    if (v.rows() < 1) fail(ErrorKind::InvalidSize, "matrix needs at least one sample");
    if (v.cols() < 2) fail(ErrorKind::InvalidSize, "matrix needs at least two features");
}

Labels numbered(const char* prefix, Eigen::Index n) {
    Labels out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

} // namespace

CompositionMatrix::CompositionMatrix(Eigen::MatrixXd values, Labels sample_ids, Labels feature_ids)
    : values_(std::move(values)), sample_ids_(std::move(sample_ids)), feature_ids_(std::move(feature_ids)) {
    check_shape(values_);
    check_labels(sample_ids_, values_.rows(), "sample");
    check_labels(feature_ids_, values_.cols(), "feature");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            const double v = values_(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                fail(ErrorKind::InvalidArgument, "entry (" + sample_ids_[i] + ", " + feature_ids_[j] +
                                                     ") is not a finite nonnegative number");
            }
        }
    }
}

StrictlyPositiveMatrix::StrictlyPositiveMatrix(Eigen::MatrixXd values, Labels sample_ids, Labels feature_ids)
    : values_(std::move(values)), sample_ids_(std::move(sample_ids)), feature_ids_(std::move(feature_ids)) {
    check_shape(values_);
    check_labels(sample_ids_, values_.rows(), "sample");
    check_labels(feature_ids_, values_.cols(), "feature");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            const double v = values_(i, j);
            if (!std::isfinite(v) || v <= 0.0) {
                fail(ErrorKind::ZeroRemains, "entry (" + sample_ids_[i] + ", " + feature_ids_[j] +
                                                 ") is not strictly positive");
            }
        }
    }
}

StrictlyPositiveMatrix StrictlyPositiveMatrix::unlabeled(Eigen::MatrixXd values) {
    auto n = values.rows();
    auto g = values.cols();
    return {std::move(values), numbered("s", n), numbered("f", g)};
}

StrictlyPositiveMatrix StrictlyPositiveMatrix::rows(const std::vector<Eigen::Index>& index) const {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(index.size()), values_.cols());
    Labels ids;
    ids.reserve(index.size());
    for (std::size_t r = 0; r < index.size(); ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = values_.row(index[r]);
        ids.push_back(sample_ids_[static_cast<std::size_t>(index[r])]);
    }
    return {std::move(sub), std::move(ids), feature_ids_};
}

Outcome Outcome::binary(Eigen::VectorXd values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0 && values[i] != 1.0) {
            fail(ErrorKind::InvalidArgument, "binary outcome value at position " + std::to_string(i + 1) + " is not 0 or 1");
        }
    }
    return {OutcomeKind::Binary, std::move(values)};
}

Outcome Outcome::continuous(Eigen::VectorXd values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            fail(ErrorKind::InvalidArgument, "outcome value at position " + std::to_string(i + 1) + " is not finite");
        }
    }
    return {OutcomeKind::Continuous, std::move(values)};
}

bool Outcome::has_both_classes() const {
    bool zero = false, one = false;
    for (Eigen::Index i = 0; i < values.size(); ++i) (values[i] == 0.0 ? zero : one) = true;
    return zero && one;
}

Outcome Outcome::rows(const std::vector<Eigen::Index>& index) const {
    Eigen::VectorXd sub(static_cast<Eigen::Index>(index.size()));
    for (std::size_t r = 0; r < index.size(); ++r) sub[static_cast<Eigen::Index>(r)] = values[index[r]];
    return {kind, std::move(sub)};
}

ZeroPolicyResult apply_zero_policy(const CompositionMatrix& m, const ZeroPolicy& policy) {
    if (!(policy.max_zero_fraction >= 0.0 && policy.max_zero_fraction <= 1.0)) {
        fail(ErrorKind::InvalidArgument, "max_zero_fraction must lie in [0, 1]");
    }
    const auto& v = m.values();
    const auto n = static_cast<double>(v.rows());

    std::vector<Eigen::Index> keep;
    Labels removed;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const auto zeros = static_cast<double>((v.col(j).array() == 0.0).count());
        if (zeros / n > policy.max_zero_fraction) {
            removed.push_back(m.feature_ids()[static_cast<std::size_t>(j)]);
        } else {
            keep.push_back(j);
        }
    }
    if (keep.size() < 2) {
        fail(ErrorKind::AllFeaturesRemoved, std::to_string(keep.size()) + " feature(s) survive the zero filter; need at least 2");
    }

    Eigen::MatrixXd kept(v.rows(), static_cast<Eigen::Index>(keep.size()));
    Labels kept_ids;
    for (std::size_t c = 0; c < keep.size(); ++c) {
        kept.col(static_cast<Eigen::Index>(c)) = v.col(keep[c]);
        kept_ids.push_back(m.feature_ids()[static_cast<std::size_t>(keep[c])]);
    }

    const bool has_zero = (kept.array() == 0.0).any();
    if (has_zero) {
        if (policy.replacement == ZeroReplacement::None) {
            fail(ErrorKind::ZeroRemains, "zeros remain after feature removal and replacement is disabled");
        }
        double min_positive = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < kept.size(); ++i) {
            const double x = kept.data()[i];
            if (x > 0.0 && x < min_positive) min_positive = x;
        }
        if (!std::isfinite(min_positive)) {
            fail(ErrorKind::AllFeaturesRemoved, "no strictly positive entry to derive a detection limit from");
        }
        const double fill = 0.5 * min_positive;
        kept = (kept.array() == 0.0).select(fill, kept);
    }
    return {StrictlyPositiveMatrix(std::move(kept), m.sample_ids(), std::move(kept_ids)), std::move(removed)};
}

StrictlyPositiveMatrix close_to_proportions(const StrictlyPositiveMatrix& m) {
    Eigen::MatrixXd p = m.values();
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
    return {std::move(p), m.sample_ids(), m.feature_ids()};
}

Eigen::MatrixXd log_matrix(const StrictlyPositiveMatrix& m) {
    const auto& v = m.values();
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j)
        for (Eigen::Index i = 0; i < v.rows(); ++i) out(i, j) = std::log(v(i, j));
    return out;
}

Eigen::MatrixXd clr_transform(const StrictlyPositiveMatrix& m) {
    Eigen::MatrixXd logs = log_matrix(m);
    const Eigen::VectorXd centre = logs.rowwise().mean();
    logs.colwise() -= centre;
    return logs;
}

PairwiseLogRatios pairwise_logratios(const StrictlyPositiveMatrix& m) {
    const Eigen::MatrixXd logs = log_matrix(m);
    const Eigen::Index g = logs.cols();
    PairwiseLogRatios out;
    out.values.resize(logs.rows(), g * (g - 1) / 2);
    out.pairs.reserve(static_cast<std::size_t>(g * (g - 1) / 2));
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < g; ++j) {
        for (Eigen::Index k = j + 1; k < g; ++k, ++c) {
            out.values.col(c) = logs.col(j) - logs.col(k);
            out.pairs.emplace_back(j, k);
        }
    }
    return out;
}

} // namespace rbb

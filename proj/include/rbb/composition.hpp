#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rbb {

using Labels = std::vector<std::string>;

/// N x G table of nonnegative abundances with unique sample and feature labels.
class CompositionMatrix {
public:
    CompositionMatrix(Eigen::MatrixXd values, Labels sample_ids, Labels feature_ids);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const Labels& sample_ids() const noexcept { return sample_ids_; }
    const Labels& feature_ids() const noexcept { return feature_ids_; }
    Eigen::Index samples() const noexcept { return values_.rows(); }
    Eigen::Index features() const noexcept { return values_.cols(); }

private:
    Eigen::MatrixXd values_;
    Labels sample_ids_;
    Labels feature_ids_;
};

/// Same shape as CompositionMatrix, every entry strictly positive (log-safe).
class StrictlyPositiveMatrix {
public:
    StrictlyPositiveMatrix(Eigen::MatrixXd values, Labels sample_ids, Labels feature_ids);

    /// Labels generated as s1..sN and f1..fG.
    static StrictlyPositiveMatrix unlabeled(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const Labels& sample_ids() const noexcept { return sample_ids_; }
    const Labels& feature_ids() const noexcept { return feature_ids_; }
    Eigen::Index samples() const noexcept { return values_.rows(); }
    Eigen::Index features() const noexcept { return values_.cols(); }

    CompositionMatrix as_composition() const { return {values_, sample_ids_, feature_ids_}; }

    /// Row subset, in the given order.
    StrictlyPositiveMatrix rows(const std::vector<Eigen::Index>& index) const;

private:
    Eigen::MatrixXd values_;
    Labels sample_ids_;
    Labels feature_ids_;
};

enum class OutcomeKind { Binary, Continuous };

/// Per-sample response. Binary outcomes are encoded 0/1.
struct Outcome {
    OutcomeKind kind = OutcomeKind::Continuous;
    Eigen::VectorXd values;

    static Outcome binary(Eigen::VectorXd values);
    static Outcome continuous(Eigen::VectorXd values);

    Eigen::Index size() const noexcept { return values.size(); }
    bool has_both_classes() const;
    Outcome rows(const std::vector<Eigen::Index>& index) const;
};

enum class ZeroReplacement { HalfDetectionLimit, None };

struct ZeroPolicy {
    double max_zero_fraction = 0.5;
    ZeroReplacement replacement = ZeroReplacement::HalfDetectionLimit;
};

struct ZeroPolicyResult {
    StrictlyPositiveMatrix matrix;
    Labels removed_features;
};

/// Drops features whose zero fraction is strictly above the threshold, then
/// replaces remaining zeros with half the smallest positive entry of the
/// surviving matrix.
ZeroPolicyResult apply_zero_policy(const CompositionMatrix& m, const ZeroPolicy& policy = {});

StrictlyPositiveMatrix close_to_proportions(const StrictlyPositiveMatrix& m);

/// Elementwise natural log with scalar std::log, so every caller sees
/// bit-identical values for the same entry.
Eigen::MatrixXd log_matrix(const StrictlyPositiveMatrix& m);

/// Centered log-ratio: log of each part over the row geometric mean.
Eigen::MatrixXd clr_transform(const StrictlyPositiveMatrix& m);

struct PairwiseLogRatios {
    Eigen::MatrixXd values;                                // N x G(G-1)/2
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs; // (j, k), j < k, lexicographic
};

/// Column (j, k) holds log(x_ij / x_ik).
PairwiseLogRatios pairwise_logratios(const StrictlyPositiveMatrix& m);

} // namespace rbb

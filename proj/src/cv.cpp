#include "rbb/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rbb/error.hpp"
#include "rbb/random.hpp"

namespace rbb {

std::vector<Fold> make_folds(const Outcome& y, int k, std::uint64_t seed) {
    const auto n = y.size();
    if (k < 2) fail(ErrorKind::InvalidArgument, "cv_folds must be at least 2");
    if (n < k) fail(ErrorKind::InvalidSize, "fewer samples than folds");

    auto rng = make_stream(seed, 0x636f6c64); // "fold"
    std::vector<Fold> folds(static_cast<std::size_t>(k));
    std::size_t next = 0;
    auto deal = [&](std::vector<Eigen::Index> idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (auto i : idx) {
            folds[next].push_back(i);
            next = (next + 1) % folds.size();
        }
    };
    if (y.kind == OutcomeKind::Binary) {
        std::vector<Eigen::Index> zeros, ones;
        for (Eigen::Index i = 0; i < n; ++i) (y.values[i] == 0.0 ? zeros : ones).push_back(i);
        deal(std::move(zeros));
        deal(std::move(ones));
    } else {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        deal(std::move(all));
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

Fold training_indices(const Fold& fold, Eigen::Index n) {
    Fold out;
    out.reserve(static_cast<std::size_t>(n) - fold.size());
    std::size_t p = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p < fold.size() && fold[p] == i) {
            ++p;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

double auc(const Eigen::Ref<const Eigen::VectorXd>& score, const Eigen::Ref<const Eigen::VectorXd>& labels) {
    const auto n = score.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] < score[b]; });

    // Average ranks over ties.
    double rank_sum_pos = 0.0;
    double positives = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && score[order[j + 1]] == score[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]] == 1.0) {
                rank_sum_pos += avg_rank;
                positives += 1.0;
            }
        }
        i = j + 1;
    }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (rank_sum_pos - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double r_squared(const Eigen::Ref<const Eigen::VectorXd>& truth, const Eigen::Ref<const Eigen::VectorXd>& predicted) {
    const double mean = truth.mean();
    const double ss_tot = (truth.array() - mean).square().sum();
    const double ss_res = (truth - predicted).squaredNorm();
    if (ss_tot == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 - ss_res / ss_tot;
}

double outcome_score(const Outcome& y, const Eigen::Ref<const Eigen::VectorXd>& predicted) {
    return y.kind == OutcomeKind::Binary ? auc(predicted, y.values) : r_squared(y.values, predicted);
}

bool CvScore::valid() const { return std::isfinite(mean); }

CvScore CvScore::worst() { return {-std::numeric_limits<double>::infinity(), 0.0, {}}; }

CvScore cross_validate(const Eigen::Ref<const Eigen::VectorXd>& z, const Outcome& y, const ModelSpec& spec,
                       const std::vector<Fold>& folds) {
    CvScore out;
    const auto n = z.size();
    for (const auto& fold : folds) {
        const auto train = training_indices(fold, n);
        Eigen::VectorXd z_train(static_cast<Eigen::Index>(train.size()));
        for (std::size_t r = 0; r < train.size(); ++r) z_train[static_cast<Eigen::Index>(r)] = z[train[r]];
        FittedGlm fit;
        try {
            fit = fit_glm(z_train, y.rows(train), spec);
        } catch (const Error&) {
            return CvScore::worst();
        }
        Eigen::VectorXd predicted(static_cast<Eigen::Index>(fold.size()));
        for (std::size_t r = 0; r < fold.size(); ++r) predicted[static_cast<Eigen::Index>(r)] = fit.predict(z[fold[r]], spec.link);
        const double s = outcome_score(y.rows(fold), predicted);
        if (!std::isfinite(s)) return CvScore::worst();
        out.folds.push_back(s);
    }
    const double k = static_cast<double>(out.folds.size());
    out.mean = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) / k;
    double ss = 0.0;
    for (double s : out.folds) ss += (s - out.mean) * (s - out.mean);
    out.se = k > 1.0 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
    return out;
}

} // namespace rbb

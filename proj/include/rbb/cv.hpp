#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rbb/composition.hpp"
#include "rbb/glm.hpp"

namespace rbb {

using Fold = std::vector<Eigen::Index>;

/// K disjoint held-out index sets covering all samples. Stratified by class for
/// binary outcomes. Each set is sorted ascending.
std::vector<Fold> make_folds(const Outcome& y, int k, std::uint64_t seed);

/// Complement of `fold` in [0, n).
Fold training_indices(const Fold& fold, Eigen::Index n);

/// Area under the ROC curve (Mann-Whitney, ties count one half).
double auc(const Eigen::Ref<const Eigen::VectorXd>& score, const Eigen::Ref<const Eigen::VectorXd>& labels);

/// 1 - SS_res / SS_tot with SS_tot about the mean of `truth`.
double r_squared(const Eigen::Ref<const Eigen::VectorXd>& truth, const Eigen::Ref<const Eigen::VectorXd>& predicted);

/// AUC for binary outcomes, R^2 otherwise.
double outcome_score(const Outcome& y, const Eigen::Ref<const Eigen::VectorXd>& predicted);

struct CvScore {
    double mean = 0.0;
    double se = 0.0; // standard error of the fold scores
    std::vector<double> folds;

    bool valid() const;
    static CvScore worst();
};

/// Fits the GLM on each training split of a fixed score vector and scores the
/// held-out predictions. A degenerate split makes the whole score `worst()`.
CvScore cross_validate(const Eigen::Ref<const Eigen::VectorXd>& z, const Outcome& y, const ModelSpec& spec,
                       const std::vector<Fold>& folds);

} // namespace rbb

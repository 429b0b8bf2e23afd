#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rbb/composition.hpp"
#include "rbb/cv.hpp"
#include "rbb/glm.hpp"
#include "rbb/io.hpp"
#include "rbb/ratio_biomarker.hpp"

namespace rbb {

enum class LearnerKind { Stepwise, Relaxed, Evolutionary };

std::string_view to_string(LearnerKind kind);

struct LearnerConfig {
    /// Sparsity control. Relaxed learner: number of CV standard errors a sparser
    /// cutoff may fall below the best one. Evolutionary: weight of the
    /// active-fraction penalty in the fitness.
    double lambda = 1.0;
    int epochs = 300;
    double learning_rate = 0.05;
    int cv_folds = 5;
    std::uint64_t seed = 1;
    int population = 64;
    int generations = 100;
    /// Per-gene mutation probability; 0 selects 1 / G.
    double mutation_rate = 0.0;
    int tournament = 3;
    /// Upper bound on G+ + G- for the stepwise learner; 0 means no bound.
    std::size_t max_active = 0;

    void validate() const;
};

struct LearnedModel {
    RatioBiomarker biomarker;
    FittedGlm glm;
    ModelSpec spec;
    Labels feature_ids;
    std::string learner;
    LearnerConfig config;

    /// Training predictions phi(beta z + beta0).
    Eigen::VectorXd fitted;
    CvScore cv;
    /// Per-epoch training loss (relaxed), best fitness per generation
    /// (evolutionary) or CV score per accepted step (stepwise).
    std::vector<double> loss_curve;
    bool converged = true;
    std::optional<std::pair<Eigen::Index, Eigen::Index>> initial_pair;
};

/// Forward stepwise balance search: best pair by CV score, then greedy single
/// additions to either side while the CV score improves by more than one
/// standard error.
LearnedModel forward_stepwise_balance(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                                      const LearnerConfig& config);

/// Sigmoid-gated relaxation trained by gradient descent, then discretised by a
/// cutoff sweep with a lambda-standard-error rule.
LearnedModel relaxed_gradient_learner(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                                      const LearnerConfig& config, AggregationMode mode);

/// Genetic search over {numerator, denominator, excluded} memberships for an SLR.
LearnedModel evolutionary_slr(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                              const LearnerConfig& config);

LearnedModel learn(LearnerKind kind, const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                   const LearnerConfig& config, AggregationMode mode);

/// Biomarker score followed by the stored link. Throws FeatureMismatch when
/// the feature ids differ from the training matrix.
Eigen::VectorXd predict(const LearnedModel& model, const StrictlyPositiveMatrix& m_new);

/// Held-out score of the whole learning procedure: the learner is rerun on each
/// training split and scored on the corresponding held-out samples.
CvScore assess_learner(LearnerKind kind, const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                       const LearnerConfig& config, AggregationMode mode);

io::KeyValueDoc serialize(const LearnedModel& model);
LearnedModel deserialize(const io::KeyValueDoc& doc);

namespace relaxed {

struct Params {
    Eigen::VectorXd gate; // one logit per feature
    double beta = 0.0;
    double beta0 = 0.0;
};

/// Mean GLM loss of the soft biomarker. `features` is the log matrix for
/// balances and the closed proportions for SLRs. Fills `gradient` when given.
double loss(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, Link link, AggregationMode mode,
            const Params& p, Params* gradient = nullptr);

/// Soft biomarker score for every sample.
Eigen::VectorXd soft_score(const Eigen::MatrixXd& features, AggregationMode mode, const Eigen::VectorXd& gate);

} // namespace relaxed

} // namespace rbb

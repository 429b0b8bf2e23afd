#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbb/composition.hpp"
#include "rbb/ratio_biomarker.hpp"

namespace rbb {

/// Multiplicative measurement model: x = x* . theta_j . C_i . eps_ij with
/// eps_ij lognormal(0, noise_sd^2).
struct BiasModel {
    Eigen::VectorXd feature_bias; // theta, one per feature
    Eigen::VectorXd depth;        // C, one per sample
    double noise_sd = 0.0;

    static BiasModel identity(Eigen::Index samples, Eigen::Index features);
    void validate() const;
};

struct PlantedSignal {
    RatioBiomarker biomarker;
    double effect = 0.0; // group difference of the planted log-ratio
};

struct GroundTruthScenario {
    Eigen::MatrixXd true_abundances; // N x G, strictly positive
    std::vector<int> group;          // 0 / 1 per sample
    Labels sample_ids;
    Labels feature_ids;
    std::optional<PlantedSignal> planted;

    void validate() const;
    Outcome outcome() const;
};

/// Observed abundances under the bias model. Deterministic for a given seed.
CompositionMatrix observe(const GroundTruthScenario& s, const BiasModel& b, std::uint64_t seed);

enum class Direction : int { Down = -1, None = 0, Up = 1 };

struct DaNotionReport {
    Direction absolute = Direction::None;   // group 1 minus group 0, true abundances
    Direction relative = Direction::None;   // same, on closed proportions of the observed data
    Direction presential = Direction::None; // same, on the fraction of samples with count > 0
};

DaNotionReport da_notion_report(const GroundTruthScenario& s, const CompositionMatrix& obs, const std::string& feature);

struct PlantedOptions {
    double log_noise_sd = 0.7;  // per-entry sd of log true abundance
    double log_mean_low = 2.0;  // baseline log abundances drawn uniformly in [low, high]
    double log_mean_high = 7.0;
};

/// Two alternating groups; one numerator and one denominator feature shifted by
/// +effect/2 and -effect/2 on the log scale in group 1. All other features are
/// exchangeable noise.
GroundTruthScenario planted_signal_scenario(int n, int g, double effect, std::uint64_t seed,
                                            const PlantedOptions& options = {});

/// Fixed three-feature scenario where feature "a" doubles in absolute terms
/// while its proportion halves because "b" grows much faster.
GroundTruthScenario three_feature_scenario();

/// Paired matrices sharing one latent factor. Each matrix carries the factor
/// on a handful of features (half up, half down); everything else is noise.
struct PairedOmics {
    StrictlyPositiveMatrix t;
    StrictlyPositiveMatrix u;
    Eigen::VectorXd factor;
};

struct PairedOptions {
    int signal_features = 4;
    double loading = 1.5;
    double log_noise_sd = 0.5;
};

PairedOmics paired_omics_scenario(int n, int g_t, int g_u, std::uint64_t seed, const PairedOptions& options = {});

} // namespace rbb

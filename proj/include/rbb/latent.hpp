#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbb/biomarker.hpp"
#include "rbb/composition.hpp"

namespace rbb {

enum class LatentSource { Pca, PlsXSide, PlsYSide, NnEncoder };

std::string_view to_string(LatentSource source);

struct LatentRepresentation {
    Eigen::VectorXd scores;
    LatentSource source = LatentSource::Pca;
    std::string provenance; // which matrices produced it, e.g. "T" or "T,U"
};

struct PcaResult {
    LatentRepresentation latent;
    Eigen::VectorXd loading; // unit norm, largest-magnitude entry positive
    Eigen::RowVectorXd center;
};

/// First principal component of the column-centred matrix.
PcaResult pca_first_component(const Eigen::MatrixXd& m, const std::string& provenance = "X");

struct PlsResult {
    LatentRepresentation x_side; // t = X w
    LatentRepresentation y_side; // u = Y c
    Eigen::VectorXd x_weights;   // w, unit norm
    Eigen::VectorXd y_weights;   // c, unit norm
    int iterations = 0;
};

struct PlsOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

/// One-component NIPALS on column-centred X and Y.
PlsResult pls_first_component(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const PlsOptions& options = {},
                              const std::string& x_name = "X", const std::string& y_name = "Y");

struct EncoderDecoderConfig {
    int hidden_units = 32;
    int epochs = 2000;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
    /// Training stops early once the relative loss change over 50 epochs falls below this.
    double tol = 1e-7;
    /// Fraction of samples held out to stop training when their loss stops
    /// improving; the parameters with the lowest held-out loss are kept. 0 disables.
    double validation_fraction = 0.2;
    int patience = 100;
    /// Independent initialisations; the one with the lowest held-out loss (or
    /// training loss without a held-out set) is returned.
    int restarts = 3;
};

/// input -> hidden (ReLU) -> 1 -> hidden (ReLU) -> output, all affine layers.
struct EncoderDecoder {
    Eigen::MatrixXd w1; Eigen::VectorXd b1; // hidden x in
    Eigen::RowVectorXd w2; double b2 = 0.0; // 1 x hidden
    Eigen::VectorXd w3; Eigen::VectorXd b3; // hidden x 1
    Eigen::MatrixXd w4; Eigen::VectorXd b4; // out x hidden
    Eigen::RowVectorXd x_center, y_center;  // inputs and outputs are centred before training

    static EncoderDecoder random(Eigen::Index inputs, Eigen::Index outputs, int hidden, std::uint64_t seed,
                                 std::uint64_t stream = 0);

    Eigen::VectorXd encode(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd decode(const Eigen::VectorXd& h) const;

    std::size_t parameter_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& theta);

    /// Mean squared reconstruction error over all entries of centred Y. Fills
    /// the gradient with respect to flatten() when requested.
    double loss(const Eigen::MatrixXd& x_centered, const Eigen::MatrixXd& y_centered, Eigen::VectorXd* gradient = nullptr) const;
};

struct EncoderDecoderResult {
    LatentRepresentation latent;
    EncoderDecoder network;
    double final_loss = 0.0;
    bool converged = false;
    int epochs_run = 0;
};

EncoderDecoderResult encoder_decoder_latent(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                            const EncoderDecoderConfig& cfg, const std::string& provenance = "X->Y");

/// R^2 = 1 - SS_res / SS_tot, SS_tot about the column means of `original`.
double variance_explained(const Eigen::MatrixXd& original, const Eigen::MatrixXd& reconstruction);

/// Affine least-squares reconstruction of `data` from one score vector.
Eigen::MatrixXd linear_decode(const Eigen::VectorXd& scores, const Eigen::MatrixXd& data);

using Decoder = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct RbbApproximation {
    LearnedModel model;
    Eigen::VectorXd approximation; // beta z + beta0
    std::size_t active = 0;
    std::size_t features = 0;
    double sparsity = 0.0;          // active / features
    double latent_r2 = 0.0;         // reconstruction of `target` through h
    double rbb_r2 = 0.0;            // reconstruction of `target` through beta z + beta0
};

/// Fits h ~ beta z + beta0 with the relaxed learner (identity link), then
/// reconstructs `target` through the latent scores and through the
/// approximation. Without a decoder the reconstruction is a least-squares
/// affine fit from each score vector.
RbbApproximation approximate_latent_with_rbb(const LatentRepresentation& h, const StrictlyPositiveMatrix& m,
                                             const LearnerConfig& config, AggregationMode mode,
                                             const Eigen::MatrixXd& target, const Decoder& decoder = {});

} // namespace rbb

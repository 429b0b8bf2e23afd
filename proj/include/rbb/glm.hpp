#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbb/composition.hpp"

namespace rbb {

enum class Link { Identity, Logistic };

struct ModelSpec {
    Link link = Link::Identity;
    int max_iter = 100;
    double tol = 1e-8;
    /// L2 penalty on the slope terms of the logistic fit (intercept unpenalized).
    double ridge = 1e-6;

    static ModelSpec for_outcome(const Outcome& y);
};

struct FittedGlm {
    double beta = 0.0;
    double beta0 = 0.0;
    std::vector<double> covariate_betas;
    double std_error = 0.0;
    double p_value = 1.0;
    /// When false the coefficients are unreliable and should be reported as such.
    bool converged = true;
    int iterations = 0;
    std::vector<std::string> warnings;

    /// phi(beta * z + beta0) for the given link, ignoring covariates.
    double predict(double z, Link link) const;
};

/// Fits y ~ phi(beta z + beta0 [+ covariates]). Identity: ordinary least squares
/// with a t-based Wald p-value. Logistic: ridge-stabilised IRLS with a normal
/// Wald p-value. Throws DegenerateDesign when z is constant; a fit that runs out
/// of iterations is returned with converged = false.
FittedGlm fit_glm(const Eigen::Ref<const Eigen::VectorXd>& z, const Outcome& y, const ModelSpec& spec,
                  const std::optional<Eigen::MatrixXd>& covariates = std::nullopt);

/// Value of the penalised logistic objective (negative log-likelihood plus
/// ridge / 2 times the squared slope norm) and its gradient, for the design
/// [1, z]. Exposed so optimality can be checked from outside.
double logistic_objective(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& y,
                          double beta0, double beta, double ridge, Eigen::Vector2d* gradient = nullptr);

/// Benjamini-Hochberg step-up adjustment, capped at 1. NaN inputs are treated as 1.
std::vector<double> benjamini_hochberg(const std::vector<double>& p_values);

enum class DaaTransform { Proportions, Clr };
enum class DaaNotion { Relative, Clr, UserSupplied };

struct DaaRow {
    std::string feature_id;
    double beta = 0.0;
    double p_value = 1.0;
    double p_adjusted = 1.0;
    bool converged = true;
    /// Empty unless the fit for this feature failed; the row is then flagged
    /// with p_value = p_adjusted = 1.
    std::string error;
};

struct DaaResult {
    DaaNotion notion = DaaNotion::Relative;
    std::vector<DaaRow> rows;
};

/// One GLM per column of an already transformed matrix, BH-adjusted across columns.
DaaResult daa_columns(const Eigen::MatrixXd& columns, const Labels& ids, const Outcome& y, const ModelSpec& spec,
                      DaaNotion notion = DaaNotion::UserSupplied);

DaaResult daa(const StrictlyPositiveMatrix& m, const Outcome& y, DaaTransform transform, const ModelSpec& spec);

struct RatioTestRow {
    Eigen::Index numerator = 0;
    Eigen::Index denominator = 0;
    double beta = 0.0;
    double p_value = 1.0;
    double p_adjusted = 1.0;
    bool converged = true;
    std::string error;
};

struct RatioAnalysisOptions {
    double alpha = 0.05;
    Eigen::Index max_features = 2000;
};

struct RatioAnalysisResult {
    std::vector<RatioTestRow> tests; // lexicographic (j, k), j < k
    /// For gene j: fraction of the G - 1 ratios involving j whose adjusted
    /// p-value is below alpha.
    std::vector<double> attribution;
    Labels feature_ids;
};

RatioAnalysisResult differential_ratio_analysis(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                                                const RatioAnalysisOptions& options = {});

} // namespace rbb

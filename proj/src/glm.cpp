#include "rbb/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "rbb/error.hpp"

namespace rbb {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double normal_two_sided(double stat) { return std::erfc(std::abs(stat) / std::sqrt(2.0)); }

double t_two_sided(double stat, double df) {
    boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(stat))));
}

bool is_constant(const Eigen::Ref<const Eigen::VectorXd>& z) {
    const double lo = z.minCoeff();
    const double hi = z.maxCoeff();
    return hi - lo <= 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

void check_inputs(const Eigen::Ref<const Eigen::VectorXd>& z, const Outcome& y, const ModelSpec& spec,
                  const std::optional<Eigen::MatrixXd>& covariates) {
    if (z.size() != y.size()) {
        fail(ErrorKind::DimensionMismatch, "predictor has " + std::to_string(z.size()) + " values, outcome has " +
                                               std::to_string(y.size()));
    }
    if (covariates && covariates->rows() != z.size()) {
        fail(ErrorKind::DimensionMismatch, "covariate rows do not match predictor length");
    }
    if (!z.allFinite()) fail(ErrorKind::InvalidArgument, "predictor contains non-finite values");
    if (spec.link == Link::Logistic) {
        if (y.kind != OutcomeKind::Binary) fail(ErrorKind::InvalidArgument, "logistic link requires a binary outcome");
        if (!y.has_both_classes()) fail(ErrorKind::InvalidArgument, "binary outcome needs both classes present");
    } else if (y.kind != OutcomeKind::Continuous) {
        fail(ErrorKind::InvalidArgument, "identity link requires a continuous outcome");
    }
    if (spec.max_iter < 1) fail(ErrorKind::InvalidArgument, "max_iter must be at least 1");
    if (spec.ridge < 0.0) fail(ErrorKind::InvalidArgument, "ridge must be nonnegative");
    if (is_constant(z)) fail(ErrorKind::DegenerateDesign, "predictor is constant");
}

Eigen::MatrixXd design(const Eigen::Ref<const Eigen::VectorXd>& z, const std::optional<Eigen::MatrixXd>& covariates) {
    const Eigen::Index k = covariates ? covariates->cols() : 0;
    Eigen::MatrixXd x(z.size(), 2 + k);
    x.col(0).setOnes();
    x.col(1) = z;
    if (k > 0) x.rightCols(k) = *covariates;
    return x;
}

void unpack(const Eigen::VectorXd& coef, FittedGlm& fit) {
    fit.beta0 = coef[0];
    fit.beta = coef[1];
    fit.covariate_betas.assign(coef.data() + 2, coef.data() + coef.size());
}

FittedGlm fit_identity(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols()) fail(ErrorKind::DegenerateDesign, "design matrix is rank deficient");
    const Eigen::VectorXd coef = qr.solve(y);

    FittedGlm fit;
    unpack(coef, fit);
    fit.iterations = 1;

    const auto n = x.rows();
    const auto p = x.cols();
    const double rss = (y - x * coef).squaredNorm();
    if (n <= p) {
        fit.std_error = std::numeric_limits<double>::quiet_NaN();
        fit.p_value = 1.0;
        fit.warnings.emplace_back("no residual degrees of freedom; p-value set to 1");
        return fit;
    }
    const double sigma2 = rss / static_cast<double>(n - p);
    const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
    fit.std_error = std::sqrt(sigma2 * xtx_inv(1, 1));
    if (fit.std_error == 0.0 || !std::isfinite(fit.std_error)) {
        fit.p_value = fit.beta != 0.0 ? 0.0 : 1.0;
    } else {
        fit.p_value = t_two_sided(fit.beta / fit.std_error, static_cast<double>(n - p));
    }
    return fit;
}

struct LogisticState {
    double objective = 0.0;
    Eigen::VectorXd gradient;
    Eigen::VectorXd weights;
};

LogisticState logistic_state(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef,
                             double ridge, bool need_derivatives) {
    LogisticState s;
    const Eigen::VectorXd eta = x * coef;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s.objective += softplus(eta[i]) - y[i] * eta[i];
    const Eigen::VectorXd slopes = coef.tail(coef.size() - 1);
    s.objective += 0.5 * ridge * slopes.squaredNorm();
    if (!need_derivatives) return s;

    Eigen::VectorXd residual(eta.size());
    s.weights.resize(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double p = sigmoid(eta[i]);
        residual[i] = p - y[i];
        s.weights[i] = p * (1.0 - p);
    }
    s.gradient = x.transpose() * residual;
    s.gradient.tail(slopes.size()) += ridge * slopes;
    return s;
}

FittedGlm fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ModelSpec& spec) {
    const auto p = x.cols();
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    const double mean = y.mean();
    coef[0] = std::log(mean / (1.0 - mean));

    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, spec.ridge);
    penalty[0] = 0.0;

    FittedGlm fit;
    fit.converged = false;
    LogisticState state = logistic_state(x, y, coef, spec.ridge, true);
    Eigen::MatrixXd hessian;
    for (int iter = 0; iter <= spec.max_iter; ++iter) {
        hessian = x.transpose() * state.weights.asDiagonal() * x;
        hessian.diagonal() += penalty;
        fit.iterations = iter;
        if (state.gradient.norm() <= spec.tol * (1.0 + std::abs(coef[1]))) {
            fit.converged = true;
            break;
        }
        if (iter == spec.max_iter) break;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        Eigen::VectorXd step = ldlt.solve(state.gradient);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            fit.warnings.emplace_back("singular Hessian in IRLS");
            break;
        }
        // Newton step with halving until the objective does not increase.
        double scale = 1.0;
        LogisticState next;
        Eigen::VectorXd candidate;
        for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
            candidate = coef - scale * step;
            next = logistic_state(x, y, candidate, spec.ridge, false);
            if (next.objective <= state.objective + 1e-12 * std::abs(state.objective)) break;
        }
        coef = candidate;
        state = logistic_state(x, y, coef, spec.ridge, true);
    }

    unpack(coef, fit);
    const Eigen::MatrixXd cov = hessian.inverse();
    fit.std_error = std::sqrt(cov(1, 1));
    fit.p_value = std::isfinite(fit.std_error) && fit.std_error > 0.0 ? normal_two_sided(fit.beta / fit.std_error) : 1.0;
    if (!fit.converged) fit.warnings.emplace_back("IRLS did not converge; coefficients are unreliable");

    const Eigen::VectorXd eta = x * coef;
    if (eta.cwiseAbs().maxCoeff() > 30.0) {
        fit.warnings.emplace_back("quasi-separation: slope bounded by the ridge penalty");
    }
    return fit;
}

} // namespace

ModelSpec ModelSpec::for_outcome(const Outcome& y) {
    ModelSpec spec;
    spec.link = y.kind == OutcomeKind::Binary ? Link::Logistic : Link::Identity;
    return spec;
}

double FittedGlm::predict(double z, Link link) const {
    const double eta = beta * z + beta0;
    return link == Link::Logistic ? sigmoid(eta) : eta;
}

FittedGlm fit_glm(const Eigen::Ref<const Eigen::VectorXd>& z, const Outcome& y, const ModelSpec& spec,
                  const std::optional<Eigen::MatrixXd>& covariates) {
    check_inputs(z, y, spec, covariates);
    const Eigen::MatrixXd x = design(z, covariates);
    if (spec.link == Link::Identity) return fit_identity(x, y.values);
    return fit_logistic(x, y.values, spec);
}

double logistic_objective(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& y,
                          double beta0, double beta, double ridge, Eigen::Vector2d* gradient) {
    const Eigen::MatrixXd x = design(z, std::nullopt);
    const Eigen::Vector2d coef(beta0, beta);
    auto s = logistic_state(x, y, coef, ridge, gradient != nullptr);
    if (gradient) *gradient = s.gradient;
    return s.objective;
}

std::vector<double> benjamini_hochberg(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    std::vector<double> p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = std::isnan(p_values[i]) ? 1.0 : p_values[i];

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const std::size_t i = order[r];
        running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(r + 1));
        adjusted[i] = std::max(running, p[i]);
    }
    return adjusted;
}

DaaResult daa_columns(const Eigen::MatrixXd& columns, const Labels& ids, const Outcome& y, const ModelSpec& spec,
                      DaaNotion notion) {
    if (static_cast<Eigen::Index>(ids.size()) != columns.cols()) {
        fail(ErrorKind::DimensionMismatch, "column label count does not match column count");
    }
    DaaResult result;
    result.notion = notion;
    result.rows.resize(ids.size());
    std::vector<double> p(ids.size());
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        auto& row = result.rows[static_cast<std::size_t>(j)];
        row.feature_id = ids[static_cast<std::size_t>(j)];
        try {
            const auto fit = fit_glm(columns.col(j), y, spec);
            row.beta = fit.beta;
            row.p_value = fit.p_value;
            row.converged = fit.converged;
        } catch (const Error& e) {
            row.beta = std::numeric_limits<double>::quiet_NaN();
            row.p_value = 1.0;
            row.converged = false;
            row.error = e.what();
        }
        p[static_cast<std::size_t>(j)] = row.p_value;
    }
    const auto adjusted = benjamini_hochberg(p);
    for (std::size_t j = 0; j < adjusted.size(); ++j) result.rows[j].p_adjusted = adjusted[j];
    return result;
}

DaaResult daa(const StrictlyPositiveMatrix& m, const Outcome& y, DaaTransform transform, const ModelSpec& spec) {
    if (m.samples() != y.size()) fail(ErrorKind::DimensionMismatch, "matrix rows do not match outcome length");
    if (transform == DaaTransform::Clr) return daa_columns(clr_transform(m), m.feature_ids(), y, spec, DaaNotion::Clr);
    return daa_columns(close_to_proportions(m).values(), m.feature_ids(), y, spec, DaaNotion::Relative);
}

RatioAnalysisResult differential_ratio_analysis(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                                                const RatioAnalysisOptions& options) {
    if (m.features() > options.max_features) {
        fail(ErrorKind::TooManyFeatures, std::to_string(m.features()) + " features imply " +
                                             std::to_string(m.features() * (m.features() - 1) / 2) +
                                             " ratio tests; cap is " + std::to_string(options.max_features) + " features");
    }
    if (m.samples() != y.size()) fail(ErrorKind::DimensionMismatch, "matrix rows do not match outcome length");

    const auto ratios = pairwise_logratios(m);
    RatioAnalysisResult result;
    result.feature_ids = m.feature_ids();
    result.tests.resize(ratios.pairs.size());
    std::vector<double> p(ratios.pairs.size());
    for (std::size_t c = 0; c < ratios.pairs.size(); ++c) {
        auto& row = result.tests[c];
        row.numerator = ratios.pairs[c].first;
        row.denominator = ratios.pairs[c].second;
        try {
            const auto fit = fit_glm(ratios.values.col(static_cast<Eigen::Index>(c)), y, spec);
            row.beta = fit.beta;
            row.p_value = fit.p_value;
            row.converged = fit.converged;
        } catch (const Error& e) {
            row.beta = std::numeric_limits<double>::quiet_NaN();
            row.p_value = 1.0;
            row.converged = false;
            row.error = e.what();
        }
        p[c] = row.p_value;
    }
    const auto adjusted = benjamini_hochberg(p);

    const auto g = static_cast<std::size_t>(m.features());
    std::vector<double> hits(g, 0.0);
    for (std::size_t c = 0; c < adjusted.size(); ++c) {
        result.tests[c].p_adjusted = adjusted[c];
        if (adjusted[c] < options.alpha) {
            hits[static_cast<std::size_t>(result.tests[c].numerator)] += 1.0;
            hits[static_cast<std::size_t>(result.tests[c].denominator)] += 1.0;
        }
    }
    result.attribution.resize(g);
    for (std::size_t j = 0; j < g; ++j) result.attribution[j] = hits[j] / static_cast<double>(g - 1);
    return result;
}

} // namespace rbb

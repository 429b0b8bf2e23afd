#include "rbb/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "rbb/error.hpp"
#include "rbb/random.hpp"

namespace rbb {

namespace {

Labels numbered(const std::string& prefix, Eigen::Index n) {
    Labels out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

Direction sign_of_difference(double group1, double group0) {
    const double diff = group1 - group0;
    const double tol = 1e-12 * (std::abs(group1) + std::abs(group0));
    if (diff > tol) return Direction::Up;
    if (diff < -tol) return Direction::Down;
    return Direction::None;
}

std::pair<double, double> group_means(const Eigen::VectorXd& v, const std::vector<int>& group) {
    double sum[2] = {0.0, 0.0};
    double count[2] = {0.0, 0.0};
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const int g = group[static_cast<std::size_t>(i)];
        sum[g] += v[i];
        count[g] += 1.0;
    }
    return {sum[0] / count[0], sum[1] / count[1]};
}

} // namespace

BiasModel BiasModel::identity(Eigen::Index samples, Eigen::Index features) {
    return {Eigen::VectorXd::Ones(features), Eigen::VectorXd::Ones(samples), 0.0};
}

void BiasModel::validate() const {
    if (!(feature_bias.array() > 0.0).all() || !feature_bias.allFinite()) {
        fail(ErrorKind::InvalidArgument, "feature biases must be positive");
    }
    if (!(depth.array() > 0.0).all() || !depth.allFinite()) fail(ErrorKind::InvalidArgument, "depths must be positive");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) fail(ErrorKind::InvalidArgument, "noise_sd must be nonnegative");
}

void GroundTruthScenario::validate() const {
    const auto n = true_abundances.rows();
    const auto g = true_abundances.cols();
    if (static_cast<Eigen::Index>(group.size()) != n || static_cast<Eigen::Index>(sample_ids.size()) != n ||
        static_cast<Eigen::Index>(feature_ids.size()) != g) {
        fail(ErrorKind::DimensionMismatch, "scenario labels do not match the abundance matrix");
    }
    if (!(true_abundances.array() > 0.0).all()) fail(ErrorKind::InvalidArgument, "true abundances must be positive");
    bool seen[2] = {false, false};
    for (int v : group) {
        if (v != 0 && v != 1) fail(ErrorKind::InvalidArgument, "group labels must be 0 or 1");
        seen[v] = true;
    }
    if (!seen[0] || !seen[1]) fail(ErrorKind::InvalidArgument, "both groups must be nonempty");
    if (planted) planted->biomarker.validate(g);
}

Outcome GroundTruthScenario::outcome() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(group.size()));
    for (std::size_t i = 0; i < group.size(); ++i) y[static_cast<Eigen::Index>(i)] = group[i];
    return Outcome::binary(std::move(y));
}

CompositionMatrix observe(const GroundTruthScenario& s, const BiasModel& b, std::uint64_t seed) {
    s.validate();
    b.validate();
    const auto n = s.true_abundances.rows();
    const auto g = s.true_abundances.cols();
    if (b.feature_bias.size() != g || b.depth.size() != n) {
        fail(ErrorKind::DimensionMismatch, "bias model is " + std::to_string(b.depth.size()) + " x " +
                                               std::to_string(b.feature_bias.size()) + ", scenario is " +
                                               std::to_string(n) + " x " + std::to_string(g));
    }
    auto rng = make_stream(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd x(n, g);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < g; ++j) {
            double v = s.true_abundances(i, j) * b.feature_bias[j] * b.depth[i];
            if (b.noise_sd > 0.0) v *= std::exp(b.noise_sd * noise(rng));
            x(i, j) = v;
        }
    }
    return {std::move(x), s.sample_ids, s.feature_ids};
}

DaNotionReport da_notion_report(const GroundTruthScenario& s, const CompositionMatrix& obs, const std::string& feature) {
    s.validate();
    if (obs.samples() != s.true_abundances.rows()) fail(ErrorKind::DimensionMismatch, "observed rows do not match scenario");
    const auto it = std::find(obs.feature_ids().begin(), obs.feature_ids().end(), feature);
    if (it == obs.feature_ids().end()) fail(ErrorKind::UnknownFeature, "no feature named '" + feature + "'");
    const auto j = static_cast<Eigen::Index>(it - obs.feature_ids().begin());
    const auto t_it = std::find(s.feature_ids.begin(), s.feature_ids.end(), feature);
    if (t_it == s.feature_ids.end()) fail(ErrorKind::UnknownFeature, "scenario has no feature named '" + feature + "'");
    const auto tj = static_cast<Eigen::Index>(t_it - s.feature_ids.begin());

    DaNotionReport report;
    auto [a0, a1] = group_means(s.true_abundances.col(tj), s.group);
    report.absolute = sign_of_difference(a1, a0);

    const auto& v = obs.values();
    Eigen::VectorXd proportion(v.rows());
    Eigen::VectorXd present(v.rows());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double total = v.row(i).sum();
        proportion[i] = total > 0.0 ? v(i, j) / total : 0.0;
        present[i] = v(i, j) > 0.0 ? 1.0 : 0.0;
    }
    auto [r0, r1] = group_means(proportion, s.group);
    report.relative = sign_of_difference(r1, r0);
    auto [p0, p1] = group_means(present, s.group);
    report.presential = sign_of_difference(p1, p0);
    return report;
}

GroundTruthScenario planted_signal_scenario(int n, int g, double effect, std::uint64_t seed, const PlantedOptions& options) {
    if (n < 4 || g < 4) fail(ErrorKind::InvalidSize, "planted scenario needs n >= 4 and g >= 4");
    if (!std::isfinite(effect)) fail(ErrorKind::InvalidArgument, "effect must be finite");

    auto rng = make_stream(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, g - 1);
    const Eigen::Index up = pick(rng);
    Eigen::Index down = up;
    while (down == up) down = pick(rng);

    std::uniform_real_distribution<double> baseline(options.log_mean_low, options.log_mean_high);
    Eigen::VectorXd mu(g);
    for (Eigen::Index j = 0; j < g; ++j) mu[j] = baseline(rng);

    std::normal_distribution<double> noise(0.0, options.log_noise_sd);
    GroundTruthScenario s;
    s.true_abundances.resize(n, g);
    s.group.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int grp = static_cast<int>(i % 2);
        s.group[static_cast<std::size_t>(i)] = grp;
        for (Eigen::Index j = 0; j < g; ++j) {
            double log_x = mu[j] + noise(rng);
            if (grp == 1 && j == up) log_x += 0.5 * effect;
            if (grp == 1 && j == down) log_x -= 0.5 * effect;
            s.true_abundances(i, j) = std::exp(log_x);
        }
    }
    s.sample_ids = numbered("s", n);
    s.feature_ids = numbered("f", g);
    s.planted = PlantedSignal{RatioBiomarker({up}, {down}, AggregationMode::Balance), effect};
    return s;
}

GroundTruthScenario three_feature_scenario() {
    GroundTruthScenario s;
    // Totals are 1000 in group 0 and 4000 in group 1.
    s.true_abundances.resize(6, 3);
    s.true_abundances << 90.0, 400.0, 510.0,  //
        100.0, 400.0, 500.0,                  //
        110.0, 400.0, 490.0,                  //
        190.0, 3300.0, 510.0,                 //
        200.0, 3300.0, 500.0,                 //
        210.0, 3300.0, 490.0;
    s.group = {0, 0, 0, 1, 1, 1};
    s.sample_ids = {"s1", "s2", "s3", "s4", "s5", "s6"};
    s.feature_ids = {"a", "b", "c"};
    return s;
}

PairedOmics paired_omics_scenario(int n, int g_t, int g_u, std::uint64_t seed, const PairedOptions& options) {
    if (n < 4 || g_t < 4 || g_u < 4) fail(ErrorKind::InvalidSize, "paired scenario needs n, g_t, g_u >= 4");
    if (options.signal_features < 2 || options.signal_features > std::min(g_t, g_u)) {
        fail(ErrorKind::InvalidSize, "signal_features must lie in [2, min(g_t, g_u)]");
    }
    auto rng = make_stream(seed);
    std::normal_distribution<double> standard(0.0, 1.0);
    Eigen::VectorXd factor(n);
    for (Eigen::Index i = 0; i < n; ++i) factor[i] = standard(rng);

    auto block = [&](int g, const std::string& prefix) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(g));
        for (int j = 0; j < g; ++j) order[static_cast<std::size_t>(j)] = j;
        std::shuffle(order.begin(), order.end(), rng);
        Eigen::VectorXd loading = Eigen::VectorXd::Zero(g);
        for (int k = 0; k < options.signal_features; ++k) {
            loading[order[static_cast<std::size_t>(k)]] = (k % 2 == 0 ? 1.0 : -1.0) * options.loading;
        }
        std::uniform_real_distribution<double> baseline(2.0, 7.0);
        Eigen::MatrixXd x(n, g);
        Eigen::VectorXd mu(g);
        for (int j = 0; j < g; ++j) mu[j] = baseline(rng);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < g; ++j)
                x(i, j) = std::exp(mu[j] + loading[j] * factor[i] + options.log_noise_sd * standard(rng));
        return StrictlyPositiveMatrix(std::move(x), numbered("s", n), numbered(prefix, g));
    };
    auto t = block(g_t, "t");
    auto u = block(g_u, "u");
    return {std::move(t), std::move(u), std::move(factor)};
}

} // namespace rbb

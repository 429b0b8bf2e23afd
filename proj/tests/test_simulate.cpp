#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "rbb/error.hpp"
#include "rbb/simulate.hpp"

using namespace rbb;
using testing::max_abs_diff;

namespace {

GroundTruthScenario small_scenario(std::uint64_t seed) {
    auto rng = make_stream(seed, 99);
    GroundTruthScenario s;
    s.true_abundances = testing::random_positive(6, 5, rng, 1.0);
    s.group = {0, 1, 0, 1, 0, 1};
    for (int i = 0; i < 6; ++i) s.sample_ids.push_back("s" + std::to_string(i));
    for (int j = 0; j < 5; ++j) s.feature_ids.push_back("f" + std::to_string(j));
    return s;
}

BiasModel random_bias(Eigen::Index n, Eigen::Index g, std::uint64_t seed, double noise) {
    auto rng = make_stream(seed, 7);
    BiasModel b;
    b.feature_bias = testing::random_scalars(g, rng, 0.1, 10.0);
    b.depth = testing::random_scalars(n, rng, 10.0, 1e5);
    b.noise_sd = noise;
    return b;
}

} // namespace

TEST_SUITE("simulate") {

TEST_CASE("identity biases reproduce the truth") {
    const auto s = small_scenario(1);
    const auto obs = observe(s, BiasModel::identity(6, 5), 3);
    CHECK(obs.values() == s.true_abundances);
}

TEST_CASE("depth multiplies its row") {
    const auto s = small_scenario(2);
    auto b = BiasModel::identity(6, 5);
    b.depth[3] = 2.0;
    const auto obs = observe(s, b, 3);
    CHECK(obs.values().row(3) == 2.0 * s.true_abundances.row(3));
    CHECK(obs.values().row(2) == s.true_abundances.row(2));
}

TEST_CASE("noise-free observation is the truth times the biases") {
    const auto s = small_scenario(3);
    const auto b = random_bias(6, 5, 4, 0.0);
    const auto obs = observe(s, b, 1);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 5; ++j)
            CHECK(obs.values()(i, j) == s.true_abundances(i, j) * b.feature_bias[j] * b.depth[i]);

    // clr(observed) = clr(true) + clr(theta), row by row.
    const Eigen::MatrixXd lhs = clr_transform(StrictlyPositiveMatrix(obs.values(), obs.sample_ids(), obs.feature_ids()));
    const Eigen::MatrixXd truth = clr_transform(StrictlyPositiveMatrix::unlabeled(s.true_abundances));
    const Eigen::VectorXd log_theta = b.feature_bias.array().log();
    const Eigen::RowVectorXd clr_theta = (log_theta.array() - log_theta.mean()).matrix().transpose();
    CHECK(max_abs_diff(lhs, truth.rowwise() + clr_theta) < 1e-10);
}

TEST_CASE("depth leaves pairwise log-ratios unchanged") {
    const auto s = small_scenario(4);
    auto b = random_bias(6, 5, 5, 0.0);
    b.feature_bias.setOnes();
    const auto obs = observe(s, b, 1);
    const auto a = pairwise_logratios(StrictlyPositiveMatrix::unlabeled(obs.values()));
    const auto t = pairwise_logratios(StrictlyPositiveMatrix::unlabeled(s.true_abundances));
    CHECK(max_abs_diff(a.values, t.values) < 1e-12);
}

TEST_CASE("observe is reproducible for a seed") {
    const auto s = small_scenario(5);
    const auto b = random_bias(6, 5, 6, 0.4);
    CHECK(observe(s, b, 42).values() == observe(s, b, 42).values());
    CHECK(observe(s, b, 42).values() != observe(s, b, 43).values());
}

TEST_CASE("bias model validation") {
    const auto s = small_scenario(6);
    auto b = BiasModel::identity(6, 4);
    CHECK_THROWS_AS(observe(s, b, 1), Error);
    b = BiasModel::identity(6, 5);
    b.depth[0] = 0.0;
    CHECK_THROWS_AS(observe(s, b, 1), Error);
}

TEST_CASE("identical groups show no differential abundance") {
    GroundTruthScenario s;
    s.true_abundances.resize(4, 2);
    s.true_abundances << 1, 2,
                         1, 2,
                         1, 2,
                         1, 2;
    s.group = {0, 0, 1, 1};
    s.sample_ids = {"a", "b", "c", "d"};
    s.feature_ids = {"x", "y"};
    const auto obs = observe(s, BiasModel::identity(4, 2), 1);
    const auto r = da_notion_report(s, obs, "x");
    CHECK(r.absolute == Direction::None);
    CHECK(r.relative == Direction::None);
    CHECK(r.presential == Direction::None);
}

TEST_CASE("absolute and relative notions disagree on the preset") {
    const auto s = three_feature_scenario();
    const auto obs = observe(s, BiasModel::identity(6, 3), 1);
    const auto r = da_notion_report(s, obs, "a");
    CHECK(r.absolute == Direction::Up);
    CHECK(r.relative == Direction::Down);
    CHECK(r.presential == Direction::None);
    // Group means: 100 -> 200 absolute, 0.1 -> 0.05 relative.
    double a0 = 0, a1 = 0, p0 = 0, p1 = 0;
    for (int i = 0; i < 3; ++i) {
        a0 += s.true_abundances(i, 0) / 3;
        a1 += s.true_abundances(i + 3, 0) / 3;
        p0 += s.true_abundances(i, 0) / s.true_abundances.row(i).sum() / 3;
        p1 += s.true_abundances(i + 3, 0) / s.true_abundances.row(i + 3).sum() / 3;
    }
    CHECK(a0 == doctest::Approx(100));
    CHECK(a1 == doctest::Approx(200));
    CHECK(p0 == doctest::Approx(0.1));
    CHECK(p1 == doctest::Approx(0.05));
}

TEST_CASE("presence is judged on observed zeros") {
    GroundTruthScenario s;
    s.true_abundances = Eigen::MatrixXd::Ones(4, 2);
    s.group = {0, 0, 1, 1};
    s.sample_ids = {"a", "b", "c", "d"};
    s.feature_ids = {"x", "y"};
    Eigen::MatrixXd v(4, 2);
    v << 0, 5,
         0, 5,
         3, 5,
         9, 5;
    const CompositionMatrix obs(v, s.sample_ids, s.feature_ids);
    CHECK(da_notion_report(s, obs, "x").presential == Direction::Up);
    CHECK(da_notion_report(s, obs, "y").presential == Direction::None);
    CHECK_THROWS_AS(da_notion_report(s, obs, "z"), Error);
    try {
        da_notion_report(s, obs, "z");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownFeature);
    }
}

TEST_CASE("planted scenario structure") {
    CHECK_THROWS_AS(planted_signal_scenario(3, 10, 2.0, 1), Error);
    CHECK_THROWS_AS(planted_signal_scenario(10, 3, 2.0, 1), Error);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto s = planted_signal_scenario(8, 5, 2.0, seed);
        REQUIRE(s.planted);
        CHECK(s.planted->biomarker.numerator.size() == 1);
        CHECK(s.planted->biomarker.denominator.size() == 1);
        CHECK(s.planted->biomarker.numerator[0] != s.planted->biomarker.denominator[0]);
    }
    const auto a = planted_signal_scenario(20, 6, 1.0, 9);
    const auto b = planted_signal_scenario(20, 6, 1.0, 9);
    CHECK(a.true_abundances == b.true_abundances);
}

namespace {

/// Group-1 minus group-0 mean of the planted log-ratio and its standard error.
std::pair<double, double> planted_difference(const GroundTruthScenario& s) {
    const auto j = s.planted->biomarker.numerator[0];
    const auto k = s.planted->biomarker.denominator[0];
    std::vector<double> v[2];
    for (Eigen::Index i = 0; i < s.true_abundances.rows(); ++i) {
        v[s.group[static_cast<std::size_t>(i)]].push_back(std::log(s.true_abundances(i, j) / s.true_abundances(i, k)));
    }
    double mean[2], var[2];
    for (int g = 0; g < 2; ++g) {
        mean[g] = 0;
        for (double x : v[g]) mean[g] += x / static_cast<double>(v[g].size());
        var[g] = 0;
        for (double x : v[g]) var[g] += (x - mean[g]) * (x - mean[g]) / static_cast<double>(v[g].size() - 1);
    }
    const double se = std::sqrt(var[0] / static_cast<double>(v[0].size()) + var[1] / static_cast<double>(v[1].size()));
    return {mean[1] - mean[0], se};
}

} // namespace

TEST_CASE("planted effect size is recovered within two standard errors") {
    int within = 0;
    double null_sum = 0;
    constexpr int seeds = 50;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        const auto [diff, se] = planted_difference(planted_signal_scenario(200, 20, 2.0, seed));
        if (std::abs(diff - 2.0) <= 2.0 * se) ++within;
        null_sum += planted_difference(planted_signal_scenario(200, 20, 0.0, seed)).first;
    }
    CHECK(within >= 45);
    CHECK(std::abs(null_sum / seeds) < 0.05);
}

TEST_CASE("paired scenario shapes") {
    const auto p = paired_omics_scenario(30, 6, 9, 1);
    CHECK(p.t.samples() == 30);
    CHECK(p.t.features() == 6);
    CHECK(p.u.features() == 9);
    CHECK(p.t.sample_ids() == p.u.sample_ids());
    CHECK(p.factor.size() == 30);
}

}

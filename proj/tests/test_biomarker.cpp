#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "rbb/biomarker.hpp"
#include "rbb/error.hpp"
#include "rbb/simulate.hpp"

using namespace rbb;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an rbb::Error");
    return ErrorKind::Parse;
}

StrictlyPositiveMatrix row(std::initializer_list<double> v) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index j = 0;
    for (double x : v) m(0, j++) = x;
    return StrictlyPositiveMatrix::unlabeled(m);
}

bool same_pair(const RatioBiomarker& b, const RatioBiomarker& planted) {
    return (b.numerator == planted.numerator && b.denominator == planted.denominator) ||
           (b.numerator == planted.denominator && b.denominator == planted.numerator);
}

bool contains_pair(const RatioBiomarker& b, const RatioBiomarker& planted) {
    auto has = [](const std::vector<Eigen::Index>& side, Eigen::Index j) {
        return std::find(side.begin(), side.end(), j) != side.end();
    };
    const auto u = planted.numerator[0];
    const auto d = planted.denominator[0];
    return (has(b.numerator, u) && has(b.denominator, d)) || (has(b.numerator, d) && has(b.denominator, u));
}

LearnerConfig fast_config() {
    LearnerConfig c;
    c.seed = 3;
    return c;
}

} // namespace

TEST_SUITE("biomarker") {

TEST_CASE("evaluation examples") {
    const double e = std::exp(1.0);
    CHECK(evaluate_biomarker(RatioBiomarker({0}, {1}, AggregationMode::Balance), row({e, 1, 7}))[0] ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(evaluate_biomarker(RatioBiomarker({0, 1}, {2}, AggregationMode::Balance), row({1, 4, 2}))[0]) < 1e-15);
    CHECK(evaluate_biomarker(RatioBiomarker({0, 1}, {2}, AggregationMode::Slr), row({3, 1, 2}))[0] ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("biomarker validation") {
    CHECK(kind_of([] { RatioBiomarker({0}, {3}, AggregationMode::Balance).validate(3); }) == ErrorKind::IndexOutOfRange);
    CHECK(kind_of([] { RatioBiomarker({0, 1}, {1}, AggregationMode::Balance).validate(3); }) == ErrorKind::OverlappingSets);
    CHECK(kind_of([] { RatioBiomarker({}, {1}, AggregationMode::Balance).validate(3); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { evaluate_biomarker(RatioBiomarker({0}, {5}, AggregationMode::Slr), row({1, 2, 3})); }) ==
          ErrorKind::IndexOutOfRange);
    const RatioBiomarker sorted({2, 0}, {1}, AggregationMode::Balance);
    CHECK(sorted.numerator == std::vector<Eigen::Index>{0, 2});
}

TEST_CASE("swapping sides negates the score") {
    auto rng = make_stream(41);
    const auto m = StrictlyPositiveMatrix::unlabeled(testing::random_positive(10, 6, rng));
    for (auto mode : {AggregationMode::Balance, AggregationMode::Slr}) {
        const RatioBiomarker b({0, 3}, {1, 4, 5}, mode);
        CHECK(testing::max_abs_diff(evaluate_biomarker(b, m), -evaluate_biomarker(b.swapped(), m)) < 1e-12);
    }
}

TEST_CASE("single-part sides reduce to the pairwise log-ratio") {
    auto rng = make_stream(42);
    const auto m = StrictlyPositiveMatrix::unlabeled(testing::random_positive(10, 5, rng));
    const auto pairs = pairwise_logratios(m);
    for (auto mode : {AggregationMode::Balance, AggregationMode::Slr}) {
        const auto z = evaluate_biomarker(RatioBiomarker({1}, {3}, mode), m);
        CHECK(testing::max_abs_diff(z, pairs.values.col(5)) < 1e-12); // (1, 3) is the sixth pair
    }
}

TEST_CASE("proportional rows give equal scores") {
    Eigen::MatrixXd v(3, 4);
    v.row(0) << 1, 2, 3, 4;
    v.row(1) = 7.5 * v.row(0);
    v.row(2) = 1e-4 * v.row(0);
    const auto m = StrictlyPositiveMatrix::unlabeled(v);
    for (auto mode : {AggregationMode::Balance, AggregationMode::Slr}) {
        const auto z = evaluate_biomarker(RatioBiomarker({0, 2}, {1, 3}, mode), m);
        CHECK(std::abs(z[1] - z[0]) < 1e-12);
        CHECK(std::abs(z[2] - z[0]) < 1e-12);
    }
}

TEST_CASE("stepwise starts from the best cross-validated pair") {
    for (std::uint64_t seed : {5u, 6u, 7u}) {
        const auto s = planted_signal_scenario(60, 7, 1.0, seed);
        const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
        const auto y = s.outcome();
        const auto spec = ModelSpec::for_outcome(y);
        auto cfg = fast_config();
        cfg.max_active = 2;
        const auto model = forward_stepwise_balance(m, y, spec, cfg);

        const auto folds = make_folds(y, cfg.cv_folds, cfg.seed);
        double best = -std::numeric_limits<double>::infinity();
        std::pair<Eigen::Index, Eigen::Index> arg{-1, -1};
        for (Eigen::Index j = 0; j < 7; ++j) {
            for (Eigen::Index k = j + 1; k < 7; ++k) {
                const Eigen::VectorXd z = (m.values().col(j).array().log() - m.values().col(k).array().log()).matrix();
                const auto score = cross_validate(z, y, spec, folds);
                if (score.mean > best) {
                    best = score.mean;
                    arg = {j, k};
                }
            }
        }
        REQUIRE(model.initial_pair);
        CHECK(*model.initial_pair == arg);
        CHECK(model.biomarker.active() == 2);
        CHECK(model.cv.mean == doctest::Approx(best));
    }
}

TEST_CASE("soft-gate gradients match finite differences") {
    auto rng = make_stream(43);
    std::normal_distribution<double> normal;
    const Eigen::Index n = 12, g = 6;
    const Eigen::MatrixXd positive = testing::random_positive(n, g, rng, 1.0);
    Eigen::VectorXd binary(n), continuous(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        binary[i] = static_cast<double>(i % 2);
        continuous[i] = normal(rng);
    }
    for (auto mode : {AggregationMode::Balance, AggregationMode::Slr}) {
        const Eigen::MatrixXd features = mode == AggregationMode::Balance ? Eigen::MatrixXd(positive.array().log()) : positive;
        for (auto link : {Link::Identity, Link::Logistic}) {
            const Eigen::VectorXd& y = link == Link::Logistic ? binary : continuous;
            relaxed::Params p;
            p.gate = Eigen::VectorXd(g);
            for (Eigen::Index j = 0; j < g; ++j) p.gate[j] = normal(rng);
            p.beta = 0.8;
            p.beta0 = -0.2;
            relaxed::Params grad;
            relaxed::loss(features, y, link, mode, p, &grad);

            const double h = 1e-5;
            auto check = [&](double analytic, auto&& perturb) {
                relaxed::Params plus = p, minus = p;
                perturb(plus, h);
                perturb(minus, -h);
                const double numeric = (relaxed::loss(features, y, link, mode, plus) -
                                        relaxed::loss(features, y, link, mode, minus)) / (2 * h);
                CHECK(std::abs(analytic - numeric) / std::max(1e-3, std::abs(numeric)) < 1e-5);
            };
            for (Eigen::Index j = 0; j < g; ++j) check(grad.gate[j], [j](relaxed::Params& q, double d) { q.gate[j] += d; });
            check(grad.beta, [](relaxed::Params& q, double d) { q.beta += d; });
            check(grad.beta0, [](relaxed::Params& q, double d) { q.beta0 += d; });
        }
    }
}

TEST_CASE("larger lambda never selects more features") {
    const auto s = planted_signal_scenario(120, 20, 1.0, 44);
    const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
    const auto y = s.outcome();
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        auto cfg = fast_config();
        cfg.lambda = lambda;
        const auto model = relaxed_gradient_learner(m, y, ModelSpec::for_outcome(y), cfg, AggregationMode::Balance);
        CHECK(model.biomarker.active() <= previous);
        previous = model.biomarker.active();
    }
}

TEST_CASE("evolutionary search without generations returns its seeded start") {
    const auto s = planted_signal_scenario(40, 9, 1.0, 45);
    const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
    const auto y = s.outcome();
    auto cfg = fast_config();
    cfg.population = 1;
    cfg.generations = 0;
    const auto model = evolutionary_slr(m, y, ModelSpec::for_outcome(y), cfg);

    // Each gene is numerator with probability q, denominator with probability q,
    // q = min(1/3, 2/G); an empty side receives one randomly chosen excluded gene.
    auto rng = make_stream(cfg.seed, 0, 0);
    const std::size_t g = 9;
    const double q = std::min(1.0 / 3.0, 2.0 / static_cast<double>(g));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> c(g, 0);
    for (auto& gene : c) {
        const double r = u(rng);
        gene = r < q ? 1 : (r < 2 * q ? -1 : 0);
    }
    std::uniform_int_distribution<std::size_t> pick(0, g - 1);
    for (int side : {1, -1}) {
        if (std::find(c.begin(), c.end(), side) != c.end()) continue;
        std::size_t j = pick(rng);
        while (c[j] != 0) j = pick(rng);
        c[j] = side;
    }
    std::vector<Eigen::Index> num, den;
    for (std::size_t j = 0; j < g; ++j) {
        if (c[j] > 0) num.push_back(static_cast<Eigen::Index>(j));
        if (c[j] < 0) den.push_back(static_cast<Eigen::Index>(j));
    }
    CHECK(model.biomarker == RatioBiomarker(num, den, AggregationMode::Slr));
    CHECK(model.loss_curve.size() == 1);
}

TEST_CASE("learners are deterministic for a seed") {
    const auto s = planted_signal_scenario(60, 10, 2.0, 46);
    const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
    const auto y = s.outcome();
    auto cfg = fast_config();
    cfg.generations = 10;
    cfg.population = 16;
    for (auto kind : {LearnerKind::Stepwise, LearnerKind::Relaxed, LearnerKind::Evolutionary}) {
        const auto mode = kind == LearnerKind::Evolutionary ? AggregationMode::Slr : AggregationMode::Balance;
        const auto a = learn(kind, m, y, ModelSpec::for_outcome(y), cfg, mode);
        const auto b = learn(kind, m, y, ModelSpec::for_outcome(y), cfg, mode);
        CHECK(a.biomarker == b.biomarker);
        CHECK(a.glm.beta == b.glm.beta);
        CHECK(a.loss_curve == b.loss_curve);
        CHECK(serialize(a).to_string() == serialize(b).to_string());
    }
}

TEST_CASE("prediction and serialization") {
    const auto s = planted_signal_scenario(60, 8, 2.0, 47);
    const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
    const auto y = s.outcome();
    const auto model = forward_stepwise_balance(m, y, ModelSpec::for_outcome(y), fast_config());
    CHECK(testing::max_abs_diff(predict(model, m), model.fitted) < 1e-12);
    CHECK(kind_of([&] { predict(model, StrictlyPositiveMatrix::unlabeled(Eigen::MatrixXd::Ones(3, 7))); }) ==
          ErrorKind::FeatureMismatch);

    auto copy = model;
    copy.glm.std_error = std::numeric_limits<double>::quiet_NaN();
    const auto text = serialize(copy).to_string();
    std::istringstream in(text);
    const auto back = deserialize(io::KeyValueDoc::parse(in));
    CHECK(back.biomarker == model.biomarker);
    CHECK(back.glm.beta == model.glm.beta);
    CHECK(back.glm.beta0 == model.glm.beta0);
    CHECK(std::isnan(back.glm.std_error));
    CHECK(back.feature_ids == model.feature_ids);
    CHECK(serialize(back).to_string() == text);
    CHECK(testing::max_abs_diff(predict(back, m), model.fitted) < 1e-12);
}

TEST_CASE("no signal gives chance-level held-out AUC") {
    const auto s = planted_signal_scenario(80, 10, 0.0, 48);
    const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
    const auto y = s.outcome();
    const auto score = assess_learner(LearnerKind::Stepwise, m, y, ModelSpec::for_outcome(y), fast_config(),
                                      AggregationMode::Balance);
    CHECK(score.folds.size() == 5);
    CHECK(score.mean < 0.7);
}

TEST_CASE("relaxed learner recovers a planted balance among many features") {
    int exact = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = planted_signal_scenario(200, 100, 2.0, seed);
        const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
        const auto y = s.outcome();
        LearnerConfig cfg;
        cfg.seed = seed;
        const auto model = relaxed_gradient_learner(m, y, ModelSpec::for_outcome(y), cfg, AggregationMode::Balance);
        if (same_pair(model.biomarker, s.planted->biomarker)) ++exact;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(exact >= 4);
    CHECK(seconds / 5 < 10.0);
}

TEST_CASE("evolutionary search finds the planted pair") {
    int contained = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = planted_signal_scenario(200, 30, 2.0, seed);
        const auto m = StrictlyPositiveMatrix::unlabeled(s.true_abundances);
        const auto y = s.outcome();
        LearnerConfig cfg;
        cfg.seed = seed;
        const auto model = evolutionary_slr(m, y, ModelSpec::for_outcome(y), cfg);
        if (contains_pair(model.biomarker, s.planted->biomarker)) ++contained;
    }
    CHECK(contained >= 4);
}

}

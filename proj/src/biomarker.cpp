#include "rbb/biomarker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rbb/error.hpp"
#include "rbb/random.hpp"

namespace rbb {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void check_learning_inputs(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                           const LearnerConfig& config) {
    config.validate();
    if (m.samples() != y.size()) fail(ErrorKind::DimensionMismatch, "matrix rows do not match outcome length");
    if (spec.link == Link::Logistic && (y.kind != OutcomeKind::Binary || !y.has_both_classes())) {
        fail(ErrorKind::InvalidArgument, "logistic link requires a binary outcome with both classes");
    }
    if (spec.link == Link::Identity && y.kind != OutcomeKind::Continuous) {
        fail(ErrorKind::InvalidArgument, "identity link requires a continuous outcome");
    }
}

Eigen::VectorXd score_of(const RatioBiomarker& b, const Eigen::MatrixXd& logs, const Eigen::MatrixXd& values) {
    return b.mode == AggregationMode::Balance ? evaluate_balance(b, logs) : evaluate_slr(b, values);
}

/// Refits the GLM on all samples and fills the parts of the model every learner shares.
LearnedModel finish(RatioBiomarker biomarker, const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                    const LearnerConfig& config, LearnerKind kind, CvScore cv) {
    LearnedModel model;
    model.biomarker = std::move(biomarker);
    model.spec = spec;
    model.feature_ids = m.feature_ids();
    model.learner = std::string(to_string(kind));
    model.config = config;
    model.cv = std::move(cv);
    const Eigen::VectorXd z = evaluate_biomarker(model.biomarker, m);
    model.glm = fit_glm(z, y, spec);
    model.fitted.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) model.fitted[i] = model.glm.predict(z[i], spec.link);
    return model;
}

// Candidate comparison: a strictly higher mean wins, so the first candidate
// seen in enumeration order keeps ties.
bool better(const CvScore& a, const CvScore& b) { return a.mean > b.mean; }

} // namespace

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
    case LearnerKind::Stepwise: return "stepwise";
    case LearnerKind::Relaxed: return "relaxed";
    case LearnerKind::Evolutionary: return "evolutionary";
    }
    return "unknown";
}

void LearnerConfig::validate() const {
    if (cv_folds < 2) fail(ErrorKind::InvalidArgument, "cv_folds must be at least 2");
    if (epochs < 1) fail(ErrorKind::InvalidArgument, "epochs must be at least 1");
    if (!(learning_rate > 0.0)) fail(ErrorKind::InvalidArgument, "learning_rate must be positive");
    if (!(lambda >= 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be nonnegative");
    if (population < 1) fail(ErrorKind::InvalidArgument, "population must be at least 1");
    if (generations < 0) fail(ErrorKind::InvalidArgument, "generations must be nonnegative");
    if (tournament < 1) fail(ErrorKind::InvalidArgument, "tournament size must be at least 1");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) fail(ErrorKind::InvalidArgument, "mutation_rate must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// Forward stepwise balance selection

LearnedModel forward_stepwise_balance(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                                      const LearnerConfig& config) {
    check_learning_inputs(m, y, spec, config);
    const auto folds = make_folds(y, config.cv_folds, config.seed);
    const Eigen::MatrixXd logs = log_matrix(m);
    const Eigen::Index g = logs.cols();

    CvScore best = CvScore::worst();
    std::pair<Eigen::Index, Eigen::Index> best_pair{-1, -1};
    for (Eigen::Index j = 0; j < g; ++j) {
        for (Eigen::Index k = j + 1; k < g; ++k) {
            const Eigen::VectorXd z = logs.col(j) - logs.col(k);
            auto score = cross_validate(z, y, spec, folds);
            if (score.valid() && better(score, best)) {
                best = std::move(score);
                best_pair = {j, k};
            }
        }
    }
    if (best_pair.first < 0) fail(ErrorKind::NoImprovingPair, "every pairwise log-ratio is degenerate");

    RatioBiomarker current({best_pair.first}, {best_pair.second}, AggregationMode::Balance);
    std::vector<double> curve{best.mean};
    const std::size_t cap = config.max_active == 0 ? static_cast<std::size_t>(g) : config.max_active;

    std::vector<bool> used(static_cast<std::size_t>(g), false);
    used[static_cast<std::size_t>(best_pair.first)] = used[static_cast<std::size_t>(best_pair.second)] = true;
    Eigen::VectorXd num_sum = logs.col(best_pair.first);
    Eigen::VectorXd den_sum = logs.col(best_pair.second);

    while (current.active() < cap) {
        CvScore step_best = CvScore::worst();
        Eigen::Index step_feature = -1;
        bool step_to_numerator = true;
        const auto n_num = static_cast<double>(current.numerator.size());
        const auto n_den = static_cast<double>(current.denominator.size());
        for (Eigen::Index f = 0; f < g; ++f) {
            if (used[static_cast<std::size_t>(f)]) continue;
            for (bool to_num : {true, false}) {
                const Eigen::VectorXd z = to_num ? Eigen::VectorXd((num_sum + logs.col(f)) / (n_num + 1.0) - den_sum / n_den)
                                                 : Eigen::VectorXd(num_sum / n_num - (den_sum + logs.col(f)) / (n_den + 1.0));
                auto score = cross_validate(z, y, spec, folds);
                if (score.valid() && better(score, step_best)) {
                    step_best = std::move(score);
                    step_feature = f;
                    step_to_numerator = to_num;
                }
            }
        }
        if (step_feature < 0 || !(step_best.mean > best.mean + best.se)) break;

        auto num = current.numerator;
        auto den = current.denominator;
        if (step_to_numerator) {
            num.push_back(step_feature);
            num_sum += logs.col(step_feature);
        } else {
            den.push_back(step_feature);
            den_sum += logs.col(step_feature);
        }
        used[static_cast<std::size_t>(step_feature)] = true;
        current = RatioBiomarker(std::move(num), std::move(den), AggregationMode::Balance);
        best = std::move(step_best);
        curve.push_back(best.mean);
    }

    auto model = finish(current, m, y, spec, config, LearnerKind::Stepwise, best);
    model.loss_curve = std::move(curve);
    model.initial_pair = best_pair;
    return model;
}

// ---------------------------------------------------------------------------
// Continuous relaxation

namespace relaxed {

namespace {

struct SoftParts {
    Eigen::VectorXd z;
    Eigen::VectorXd w_pos, w_neg;
    // Balance: weighted means per sample; SLR: weighted sums per sample.
    Eigen::VectorXd pos, neg;
    double pos_weight = 0.0, neg_weight = 0.0;
};

SoftParts soft_parts(const Eigen::MatrixXd& features, AggregationMode mode, const Eigen::VectorXd& gate) {
    SoftParts s;
    s.w_pos = gate.unaryExpr([](double a) { return sigmoid(a); });
    s.w_neg = gate.unaryExpr([](double a) { return sigmoid(-a); });
    if (mode == AggregationMode::Balance) {
        s.pos_weight = s.w_pos.sum();
        s.neg_weight = s.w_neg.sum();
        s.pos = features * s.w_pos / s.pos_weight;
        s.neg = features * s.w_neg / s.neg_weight;
        s.z = s.pos - s.neg;
    } else {
        s.pos = features * s.w_pos;
        s.neg = features * s.w_neg;
        s.z = s.pos.array().log() - s.neg.array().log();
    }
    return s;
}

} // namespace

Eigen::VectorXd soft_score(const Eigen::MatrixXd& features, AggregationMode mode, const Eigen::VectorXd& gate) {
    return soft_parts(features, mode, gate).z;
}

double loss(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, Link link, AggregationMode mode, const Params& p,
            Params* gradient) {
    const auto s = soft_parts(features, mode, p.gate);
    const auto n = static_cast<double>(y.size());
    const Eigen::VectorXd eta = (p.beta * s.z).array() + p.beta0;

    double value = 0.0;
    Eigen::VectorXd d_eta(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (link == Link::Identity) {
            const double r = eta[i] - y[i];
            value += r * r;
            d_eta[i] = 2.0 * r / n;
        } else {
            const double e = eta[i];
            value += (e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
            d_eta[i] = (sigmoid(e) - y[i]) / n;
        }
    }
    value /= n;
    if (!gradient) return value;

    gradient->beta0 = d_eta.sum();
    gradient->beta = d_eta.dot(s.z);
    const Eigen::VectorXd d_z = p.beta * d_eta;
    const Eigen::ArrayXd gate_slope = (s.w_pos.array() * s.w_neg.array());
    if (mode == AggregationMode::Balance) {
        // dz_i/dw+_j = (L_ij - pos_i) / W+, dz_i/dw-_j = -(L_ij - neg_i) / W-, dw-/da = -dw+/da.
        const Eigen::VectorXd lt_dz = features.transpose() * d_z;
        const double pos_term = s.pos.dot(d_z);
        const double neg_term = s.neg.dot(d_z);
        const Eigen::ArrayXd per_gate = (lt_dz.array() - pos_term) / s.pos_weight + (lt_dz.array() - neg_term) / s.neg_weight;
        gradient->gate = (gate_slope * per_gate).matrix();
    } else {
        const Eigen::VectorXd weight = d_z.array() * (s.pos.array().inverse() + s.neg.array().inverse());
        gradient->gate = (gate_slope * (features.transpose() * weight).array()).matrix();
    }
    return value;
}

} // namespace relaxed

LearnedModel relaxed_gradient_learner(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                                      const LearnerConfig& config, AggregationMode mode) {
    check_learning_inputs(m, y, spec, config);
    const Eigen::MatrixXd logs = log_matrix(m);
    const Eigen::MatrixXd features = mode == AggregationMode::Balance ? logs : close_to_proportions(m).values();
    const Eigen::Index g = features.cols();

    auto rng = make_stream(config.seed, 0x72656c61); // "rela"
    std::normal_distribution<double> init(0.0, 0.1);
    relaxed::Params p;
    p.gate.resize(g);
    for (Eigen::Index j = 0; j < g; ++j) p.gate[j] = init(rng);
    const double mean_y = y.values.mean();
    p.beta0 = spec.link == Link::Logistic ? std::log(mean_y / (1.0 - mean_y)) : mean_y;

    // Full-batch Adam.
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    relaxed::Params m1{Eigen::VectorXd::Zero(g), 0.0, 0.0}, m2{Eigen::VectorXd::Zero(g), 0.0, 0.0};
    relaxed::Params grad;
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(config.epochs));
    double c1 = 1.0, c2 = 1.0;
    double gate_velocity = 0.0;
    auto adam = [&](double& param, double gr, double& mom, double& vel) {
        mom = b1 * mom + (1.0 - b1) * gr;
        vel = b2 * vel + (1.0 - b2) * gr * gr;
        param -= config.learning_rate * (mom / (1.0 - c1)) / (std::sqrt(vel / (1.0 - c2)) + eps);
    };
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        curve.push_back(relaxed::loss(features, y.values, spec.link, mode, p, &grad));
        c1 *= b1;
        c2 *= b2;
        // Gates share one second-moment estimate so their relative step sizes
        // follow the gradient; per-coordinate scaling would move noise features
        // as fast as informative ones.
        m1.gate = b1 * m1.gate + (1.0 - b1) * grad.gate;
        gate_velocity = b2 * gate_velocity + (1.0 - b2) * grad.gate.squaredNorm() / static_cast<double>(g);
        p.gate -= config.learning_rate * (m1.gate / (1.0 - c1)) / (std::sqrt(gate_velocity / (1.0 - c2)) + eps);
        adam(p.beta, grad.beta, m1.beta, m2.beta);
        adam(p.beta0, grad.beta0, m1.beta0, m2.beta0);
    }
    const double final_loss = relaxed::loss(features, y.values, spec.link, mode, p);
    curve.push_back(final_loss);
    const std::size_t window = std::min<std::size_t>(10, curve.size() - 1);
    const double recent = curve[curve.size() - 1 - window];
    const bool converged = std::abs(recent - final_loss) <= 1e-3 * (1.0 + std::abs(final_loss));

    // Cutoff sweep: the k features with the largest |sigmoid(a) - 1/2| form the
    // hard biomarker, signs of a deciding the side.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(g));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Eigen::VectorXd strength = p.gate.unaryExpr([](double a) { return std::abs(sigmoid(a) - 0.5); });
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return strength[a] > strength[b]; });

    const auto folds = make_folds(y, config.cv_folds, config.seed);
    std::vector<std::pair<RatioBiomarker, CvScore>> sweep;
    std::vector<Eigen::Index> num, den;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto j = order[k];
        if (p.gate[j] > 0.0) num.push_back(j);
        else if (p.gate[j] < 0.0) den.push_back(j);
        if (num.empty() || den.empty()) continue;
        // Equal strengths belong to the same cutoff.
        if (k + 1 < order.size() && strength[order[k + 1]] == strength[j]) continue;
        RatioBiomarker candidate(num, den, mode);
        auto score = cross_validate(score_of(candidate, logs, features), y, spec, folds);
        if (score.valid()) sweep.emplace_back(std::move(candidate), std::move(score));
    }
    if (sweep.empty()) fail(ErrorKind::DegenerateDesign, "no cutoff yields a biomarker with two nonempty sides");

    const CvScore* best = &sweep.front().second;
    for (const auto& [b, s] : sweep)
        if (better(s, *best)) best = &s;
    const double threshold = best->mean - config.lambda * best->se;
    const auto chosen = std::find_if(sweep.begin(), sweep.end(), [&](const auto& e) { return e.second.mean >= threshold; });

    auto model = finish(chosen->first, m, y, spec, config, LearnerKind::Relaxed, chosen->second);
    model.loss_curve = std::move(curve);
    model.converged = converged;
    return model;
}

// ---------------------------------------------------------------------------
// Evolutionary SLR search

namespace {

using Chromosome = std::vector<signed char>; // +1 numerator, -1 denominator, 0 excluded

std::optional<RatioBiomarker> decode(const Chromosome& c) {
    std::vector<Eigen::Index> num, den;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] > 0) num.push_back(static_cast<Eigen::Index>(j));
        else if (c[j] < 0) den.push_back(static_cast<Eigen::Index>(j));
    }
    if (num.empty() || den.empty()) return std::nullopt;
    return RatioBiomarker(std::move(num), std::move(den), AggregationMode::Slr);
}

Chromosome random_chromosome(std::size_t g, Rng& rng) {
    const double q = std::min(1.0 / 3.0, 2.0 / static_cast<double>(g));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Chromosome c(g, 0);
    for (auto& gene : c) {
        const double r = u(rng);
        gene = r < q ? 1 : (r < 2.0 * q ? -1 : 0);
    }
    // Repair: give each empty side one randomly chosen excluded gene.
    std::uniform_int_distribution<std::size_t> pick(0, g - 1);
    for (signed char side : {static_cast<signed char>(1), static_cast<signed char>(-1)}) {
        if (std::find(c.begin(), c.end(), side) != c.end()) continue;
        std::size_t j = pick(rng);
        while (c[j] != 0) j = pick(rng);
        c[j] = side;
    }
    return c;
}

} // namespace

LearnedModel evolutionary_slr(const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                              const LearnerConfig& config) {
    check_learning_inputs(m, y, spec, config);
    const auto g = static_cast<std::size_t>(m.features());
    const auto folds = make_folds(y, config.cv_folds, config.seed);
    const Eigen::MatrixXd& values = m.values();
    const double mutation = config.mutation_rate > 0.0 ? config.mutation_rate : 1.0 / static_cast<double>(g);

    std::map<Chromosome, std::pair<double, CvScore>> cache;
    auto fitness = [&](const Chromosome& c) -> const std::pair<double, CvScore>& {
        if (auto it = cache.find(c); it != cache.end()) return it->second;
        auto b = decode(c);
        std::pair<double, CvScore> entry{-std::numeric_limits<double>::infinity(), CvScore::worst()};
        if (b) {
            auto score = cross_validate(evaluate_slr(*b, values), y, spec, folds);
            if (score.valid()) {
                entry.first = score.mean - config.lambda * static_cast<double>(b->active()) / static_cast<double>(g);
                entry.second = std::move(score);
            }
        }
        return cache.emplace(c, std::move(entry)).first->second;
    };

    std::vector<Chromosome> population;
    for (int i = 0; i < config.population; ++i) {
        auto rng = make_stream(config.seed, 0, static_cast<std::uint64_t>(i));
        population.push_back(random_chromosome(g, rng));
    }

    auto elite_of = [&](const std::vector<Chromosome>& pop) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pop.size(); ++i)
            if (fitness(pop[i]).first > fitness(pop[best]).first) best = i;
        return best;
    };

    std::vector<double> curve;
    std::size_t elite = elite_of(population);
    curve.push_back(fitness(population[elite]).first);
    for (int gen = 1; gen <= config.generations; ++gen) {
        std::vector<Chromosome> next;
        next.reserve(population.size());
        next.push_back(population[elite]);
        for (std::size_t child = 1; child < population.size(); ++child) {
            auto rng = make_stream(config.seed, static_cast<std::uint64_t>(gen), child);
            std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
            auto tournament = [&]() -> const Chromosome& {
                std::size_t winner = pick(rng);
                for (int t = 1; t < config.tournament; ++t) {
                    const std::size_t challenger = pick(rng);
                    if (fitness(population[challenger]).first > fitness(population[winner]).first) winner = challenger;
                }
                return population[winner];
            };
            const Chromosome& a = tournament();
            const Chromosome& b = tournament();
            std::uniform_real_distribution<double> u(0.0, 1.0);
            Chromosome c(g);
            for (std::size_t j = 0; j < g; ++j) c[j] = u(rng) < 0.5 ? a[j] : b[j];
            for (auto& gene : c) {
                if (u(rng) >= mutation) continue;
                // Move to one of the two other states.
                const signed char shift = u(rng) < 0.5 ? 1 : 2;
                gene = static_cast<signed char>((gene + 1 + shift) % 3 - 1);
            }
            next.push_back(std::move(c));
        }
        population = std::move(next);
        elite = elite_of(population);
        curve.push_back(fitness(population[elite]).first);
    }

    const auto& best = population[elite];
    auto biomarker = decode(best);
    if (!biomarker || !fitness(best).second.valid()) {
        fail(ErrorKind::DegenerateDesign, "evolutionary search found no usable SLR");
    }
    auto model = finish(*biomarker, m, y, spec, config, LearnerKind::Evolutionary, fitness(best).second);
    model.loss_curve = std::move(curve);
    return model;
}

// ---------------------------------------------------------------------------

LearnedModel learn(LearnerKind kind, const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                   const LearnerConfig& config, AggregationMode mode) {
    switch (kind) {
    case LearnerKind::Stepwise: return forward_stepwise_balance(m, y, spec, config);
    case LearnerKind::Relaxed: return relaxed_gradient_learner(m, y, spec, config, mode);
    case LearnerKind::Evolutionary: return evolutionary_slr(m, y, spec, config);
    }
    fail(ErrorKind::InvalidArgument, "unknown learner");
}

Eigen::VectorXd predict(const LearnedModel& model, const StrictlyPositiveMatrix& m_new) {
    if (m_new.feature_ids() != model.feature_ids) {
        fail(ErrorKind::FeatureMismatch, "matrix features differ from the training features (" +
                                             std::to_string(m_new.features()) + " vs " +
                                             std::to_string(model.feature_ids.size()) + ")");
    }
    const Eigen::VectorXd z = evaluate_biomarker(model.biomarker, m_new);
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = model.glm.predict(z[i], model.spec.link);
    return out;
}

CvScore assess_learner(LearnerKind kind, const StrictlyPositiveMatrix& m, const Outcome& y, const ModelSpec& spec,
                       const LearnerConfig& config, AggregationMode mode) {
    config.validate();
    const auto outer = make_folds(y, config.cv_folds, config.seed ^ 0x6f75746572ULL); // "outer"
    CvScore out;
    for (const auto& fold : outer) {
        const auto train = training_indices(fold, m.samples());
        const auto model = learn(kind, m.rows(train), y.rows(train), spec, config, mode);
        const Eigen::VectorXd held_out = predict(model, m.rows(fold));
        out.folds.push_back(outcome_score(y.rows(fold), held_out));
    }
    const double k = static_cast<double>(out.folds.size());
    out.mean = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) / k;
    double ss = 0.0;
    for (double s : out.folds) ss += (s - out.mean) * (s - out.mean);
    out.se = std::sqrt(ss / (k - 1.0) / k);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Labels ids_of(const std::vector<Eigen::Index>& idx, const Labels& features) {
    Labels out;
    for (auto j : idx) out.push_back(features[static_cast<std::size_t>(j)]);
    return out;
}

std::vector<Eigen::Index> indices_of(const Labels& ids, const Labels& features) {
    std::vector<Eigen::Index> out;
    for (const auto& id : ids) {
        auto it = std::find(features.begin(), features.end(), id);
        if (it == features.end()) fail(ErrorKind::UnknownFeature, "model references unknown feature '" + id + "'");
        out.push_back(static_cast<Eigen::Index>(it - features.begin()));
    }
    return out;
}

} // namespace

io::KeyValueDoc serialize(const LearnedModel& model) {
    io::KeyValueDoc doc;
    doc.set("format", "rbb-model/1");
    doc.set("learner", model.learner);
    doc.set("mode", std::string(to_string(model.biomarker.mode)));
    doc.set("link", model.spec.link == Link::Logistic ? "logistic" : "identity");
    doc.set_list("numerator", ids_of(model.biomarker.numerator, model.feature_ids));
    doc.set_list("denominator", ids_of(model.biomarker.denominator, model.feature_ids));
    doc.set("beta", model.glm.beta);
    doc.set("beta0", model.glm.beta0);
    doc.set("glm.std_error", model.glm.std_error);
    doc.set("glm.p_value", model.glm.p_value);
    doc.set("glm.converged", model.glm.converged);
    doc.set("cv.score", model.cv.mean);
    doc.set("cv.se", model.cv.se);
    doc.set("converged", model.converged);
    doc.set("seed", std::to_string(model.config.seed));
    doc.set("config.lambda", model.config.lambda);
    doc.set("config.epochs", model.config.epochs);
    doc.set("config.learning_rate", model.config.learning_rate);
    doc.set("config.cv_folds", model.config.cv_folds);
    doc.set("config.population", model.config.population);
    doc.set("config.generations", model.config.generations);
    doc.set("config.mutation_rate", model.config.mutation_rate);
    doc.set("config.tournament", model.config.tournament);
    doc.set("config.max_active", model.config.max_active);
    doc.set("spec.max_iter", model.spec.max_iter);
    doc.set("spec.tol", model.spec.tol);
    doc.set("spec.ridge", model.spec.ridge);
    doc.set_list("features", model.feature_ids);
    return doc;
}

namespace {

/// Statistics may legitimately be non-finite (an undefined standard error, a
/// worst-case CV score), which the strict number parser rejects.
double statistic(const io::KeyValueDoc& doc, const std::string& key) {
    const auto& text = doc.get(key);
    if (text == "nan" || text == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    return doc.get_double(key);
}

} // namespace

LearnedModel deserialize(const io::KeyValueDoc& doc) {
    if (doc.get("format") != "rbb-model/1") fail(ErrorKind::Parse, "unsupported model format '" + doc.get("format") + "'");
    LearnedModel model;
    model.learner = doc.get("learner");
    model.feature_ids = doc.get_list("features");
    const auto& mode = doc.get("mode");
    if (mode != "balance" && mode != "slr") fail(ErrorKind::Parse, "unknown mode '" + mode + "'");
    const auto& link = doc.get("link");
    if (link != "logistic" && link != "identity") fail(ErrorKind::Parse, "unknown link '" + link + "'");
    model.spec.link = link == "logistic" ? Link::Logistic : Link::Identity;
    model.spec.max_iter = static_cast<int>(doc.get_int("spec.max_iter"));
    model.spec.tol = doc.get_double("spec.tol");
    model.spec.ridge = doc.get_double("spec.ridge");
    model.biomarker = RatioBiomarker(indices_of(doc.get_list("numerator"), model.feature_ids),
                                     indices_of(doc.get_list("denominator"), model.feature_ids),
                                     mode == "balance" ? AggregationMode::Balance : AggregationMode::Slr);
    model.biomarker.validate(static_cast<Eigen::Index>(model.feature_ids.size()));
    model.glm.beta = doc.get_double("beta");
    model.glm.beta0 = doc.get_double("beta0");
    model.glm.std_error = statistic(doc, "glm.std_error");
    model.glm.p_value = statistic(doc, "glm.p_value");
    model.glm.converged = doc.get("glm.converged") == "true";
    model.cv.mean = statistic(doc, "cv.score");
    model.cv.se = statistic(doc, "cv.se");
    model.converged = doc.get("converged") == "true";
    model.config.seed = static_cast<std::uint64_t>(std::stoull(doc.get("seed")));
    model.config.lambda = doc.get_double("config.lambda");
    model.config.epochs = static_cast<int>(doc.get_int("config.epochs"));
    model.config.learning_rate = doc.get_double("config.learning_rate");
    model.config.cv_folds = static_cast<int>(doc.get_int("config.cv_folds"));
    model.config.population = static_cast<int>(doc.get_int("config.population"));
    model.config.generations = static_cast<int>(doc.get_int("config.generations"));
    model.config.mutation_rate = doc.get_double("config.mutation_rate");
    model.config.tournament = static_cast<int>(doc.get_int("config.tournament"));
    model.config.max_active = static_cast<std::size_t>(doc.get_int("config.max_active"));
    return model;
}

} // namespace rbb

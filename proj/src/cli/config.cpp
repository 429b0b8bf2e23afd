#include "rbb/cli.hpp"

#include <algorithm>
#include <charconv>

namespace rbb::cli {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return ExitParse;
    case ErrorKind::NotConverged: return ExitConvergence;
    default: return ExitPrecondition;
    }
}

const std::vector<OptionSpec>& option_specs() {
    static const std::vector<OptionSpec> specs = {
        {"matrix", "", "input matrix (samples in rows unless features_in_rows)"},
        {"outcome", "", "outcome table: sample id, value"},
        {"matrix2", "", "second matrix for paired analyses (U)"},
        {"test_matrix", "", "held-out matrix for learn"},
        {"test_outcome", "", "held-out outcome for learn"},
        {"out_dir", "out", "output directory"},
        {"features_in_rows", "false", "input matrices list features in rows"},
        {"outcome_kind", "auto", "auto|binary|continuous"},
        {"seed", "1", "top-level random seed"},
        {"zero_threshold", "0.5", "drop features whose zero fraction exceeds this"},
        {"zero_replacement", "half-min", "half-min|none"},
        {"transform", "clr", "transform: clr,prop,pairwise (comma list); daa: clr|prop"},
        {"mode", "balance", "balance|slr"},
        {"learner", "stepwise", "stepwise|relaxed|evolutionary"},
        {"lambda", "1", "sparsity control of the relaxed and evolutionary learners"},
        {"epochs", "300", "relaxed learner epochs"},
        {"learning_rate", "0.05", "relaxed learner step size"},
        {"cv_folds", "5", "cross-validation folds"},
        {"population", "64", "evolutionary population size"},
        {"generations", "100", "evolutionary generations"},
        {"mutation_rate", "0", "per-gene mutation rate, 0 for 1/G"},
        {"tournament", "3", "tournament size"},
        {"max_active", "0", "stepwise bound on active features, 0 for none"},
        {"link", "auto", "auto|identity|logistic"},
        {"max_iter", "100", "GLM iteration limit"},
        {"tol", "1e-8", "GLM convergence tolerance"},
        {"ridge", "1e-6", "logistic slope ridge penalty"},
        {"alpha", "0.05", "significance level"},
        {"max_features", "2000", "ratio analysis feature cap"},
        {"preset", "planted", "simulate: planted|three-feature|zero-noise|paired"},
        {"samples", "200", "simulated samples"},
        {"features", "50", "simulated features (T)"},
        {"features2", "80", "simulated features of U (paired)"},
        {"effect", "2", "planted log-ratio effect"},
        {"log_noise_sd", "0.7", "sd of true log abundances (planted) or per-entry noise (paired)"},
        {"bias_sd", "0.5", "log sd of per-feature measurement efficiency"},
        {"depth", "10000", "median sequencing depth factor"},
        {"depth_sd", "0.5", "log sd of the depth factor"},
        {"measurement_sd", "0.1", "log sd of multiplicative measurement noise"},
        {"signal_features", "4", "paired: features carrying the shared factor"},
        {"loading", "1.5", "paired: factor loading"},
        {"latent", "pca", "approx: pca|pls|nn"},
        {"target", "T", "approx: block the latent describes (T=matrix, U=matrix2)"},
        {"source", "T", "approx: block the RBB is learned on"},
        {"raw", "false", "compute latents on raw values instead of clr"},
        {"hidden_units", "32", "encoder-decoder hidden width"},
        {"nn_epochs", "2000", "encoder-decoder epochs"},
        {"nn_learning_rate", "0.01", "encoder-decoder step size"},
    };
    return specs;
}

std::string flag_name(const std::string& key) {
    std::string out = key;
    std::replace(out.begin(), out.end(), '_', '-');
    return out;
}

namespace {

const OptionSpec* find_spec(const std::string& key) {
    for (const auto& s : option_specs()) {
        if (s.key == key) return &s;
    }
    return nullptr;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
    fail(ErrorKind::Parse, "invalid value '" + value + "' for " + key + ": expected " + expected);
}

} // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    for (const auto& s : option_specs()) c.values_[s.key] = s.default_value;
    return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!find_spec(key)) fail(ErrorKind::Parse, "unknown setting '" + key + "'");
    values_[key] = value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
    const auto doc = io::KeyValueDoc::parse_file(path);
    for (const auto& [raw_key, value] : doc.entries()) {
        std::string key = raw_key;
        if (key.rfind("config.", 0) == 0) key = key.substr(7);
        if (find_spec(key)) values_[key] = value;
    }
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::Parse, "unknown setting '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const auto& v = get(key);
    const auto d = io::parse_double(v);
    if (!d) bad_value(key, v, "a number");
    return *d;
}

long long RunConfig::get_int(const std::string& key) const {
    const auto& v = get(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "an integer");
    return out;
}

std::uint64_t RunConfig::get_seed() const {
    const auto& v = get("seed");
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value("seed", v, "a nonnegative integer");
    return out;
}

bool RunConfig::get_bool(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "true or false");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : option_specs()) out.emplace_back(s.key, get(s.key));
    return out;
}

ZeroPolicy RunConfig::zero_policy() const {
    ZeroPolicy p;
    p.max_zero_fraction = get_double("zero_threshold");
    const auto& r = get("zero_replacement");
    if (r == "half-min") p.replacement = ZeroReplacement::HalfDetectionLimit;
    else if (r == "none") p.replacement = ZeroReplacement::None;
    else bad_value("zero_replacement", r, "half-min or none");
    return p;
}

LearnerConfig RunConfig::learner_config() const {
    LearnerConfig c;
    c.lambda = get_double("lambda");
    c.epochs = static_cast<int>(get_int("epochs"));
    c.learning_rate = get_double("learning_rate");
    c.cv_folds = static_cast<int>(get_int("cv_folds"));
    c.seed = get_seed();
    c.population = static_cast<int>(get_int("population"));
    c.generations = static_cast<int>(get_int("generations"));
    c.mutation_rate = get_double("mutation_rate");
    c.tournament = static_cast<int>(get_int("tournament"));
    const long long max_active = get_int("max_active");
    if (max_active < 0) bad_value("max_active", get("max_active"), "a nonnegative integer");
    c.max_active = static_cast<std::size_t>(max_active);
    return c;
}

ModelSpec RunConfig::model_spec(const Outcome& y) const {
    ModelSpec s = ModelSpec::for_outcome(y);
    const auto& link = get("link");
    if (link == "identity") s.link = Link::Identity;
    else if (link == "logistic") s.link = Link::Logistic;
    else if (link != "auto") bad_value("link", link, "auto, identity or logistic");
    s.max_iter = static_cast<int>(get_int("max_iter"));
    s.tol = get_double("tol");
    s.ridge = get_double("ridge");
    return s;
}

io::OutcomeHint RunConfig::outcome_hint() const {
    const auto& k = get("outcome_kind");
    if (k == "auto") return io::OutcomeHint::Auto;
    if (k == "binary") return io::OutcomeHint::Binary;
    if (k == "continuous") return io::OutcomeHint::Continuous;
    bad_value("outcome_kind", k, "auto, binary or continuous");
}

AggregationMode RunConfig::mode() const {
    const auto& m = get("mode");
    if (m == "balance") return AggregationMode::Balance;
    if (m == "slr") return AggregationMode::Slr;
    bad_value("mode", m, "balance or slr");
}

LearnerKind RunConfig::learner() const {
    const auto& l = get("learner");
    if (l == "stepwise") return LearnerKind::Stepwise;
    if (l == "relaxed") return LearnerKind::Relaxed;
    if (l == "evolutionary") return LearnerKind::Evolutionary;
    bad_value("learner", l, "stepwise, relaxed or evolutionary");
}

} // namespace rbb::cli

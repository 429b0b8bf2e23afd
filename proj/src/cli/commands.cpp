#include "rbb/cli.hpp"

#include <chrono>
#include <sstream>

#include <CLI11.hpp>

#include "rbb/benchmark.hpp"
#include "rbb/cv.hpp"
#include "rbb/random.hpp"
#include "rbb/simulate.hpp"

namespace rbb::cli {

namespace {

using io::format_double;

const std::vector<std::string> path_keys = {"matrix", "outcome", "matrix2", "test_matrix", "test_outcome"};

void require(const RunConfig& c, const std::string& key) {
    if (!c.has(key)) fail(ErrorKind::InvalidArgument, "--" + flag_name(key) + " is required for " + c.subcommand);
}

CompositionMatrix read_matrix(const RunConfig& c, const std::string& key) {
    require(c, key);
    return io::read_matrix_file(c.get(key), c.get_bool("features_in_rows"));
}

ZeroPolicyResult load_matrix(const RunConfig& c, const std::string& key) {
    return apply_zero_policy(read_matrix(c, key), c.zero_policy());
}

Outcome load_outcome(const RunConfig& c, const std::string& key, const Labels& samples) {
    require(c, key);
    return io::read_outcome_file(c.get(key), samples, c.outcome_hint());
}

/// Rows of `m` reordered to `order`; both must list the same samples.
StrictlyPositiveMatrix align_samples(const StrictlyPositiveMatrix& m, const Labels& order) {
    if (m.sample_ids() == order) return m;
    if (static_cast<std::size_t>(m.samples()) != order.size()) {
        fail(ErrorKind::DimensionMismatch, "paired matrices have different sample counts");
    }
    std::map<std::string, Eigen::Index> position;
    for (Eigen::Index i = 0; i < m.samples(); ++i) position[m.sample_ids()[static_cast<std::size_t>(i)]] = i;
    std::vector<Eigen::Index> index;
    for (const auto& id : order) {
        const auto it = position.find(id);
        if (it == position.end()) fail(ErrorKind::DimensionMismatch, "sample '" + id + "' missing from second matrix");
        index.push_back(it->second);
    }
    return m.rows(index);
}

std::string lines(const Labels& ids) {
    std::string out;
    for (const auto& id : ids) out += id + "\n";
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Labels ids_of(const std::vector<Eigen::Index>& index, const Labels& ids) {
    Labels out;
    for (auto j : index) out.push_back(ids[static_cast<std::size_t>(j)]);
    return out;
}

std::string join(const Labels& ids, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

std::string vector_table(const Labels& ids, const std::string& id_name,
                         const std::vector<std::pair<std::string, Eigen::VectorXd>>& columns) {
    io::Table t;
    t.header.push_back(id_name);
    for (const auto& c : columns) t.header.push_back(c.first);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<std::string> row = {ids[i]};
        for (const auto& c : columns) row.push_back(format_double(c.second[static_cast<Eigen::Index>(i)]));
        t.rows.push_back(std::move(row));
    }
    return t.to_string();
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

} // namespace

RunOutputs cmd_transform(const RunConfig& c) {
    const auto z = load_matrix(c, "matrix");
    const auto& m = z.matrix;
    RunOutputs out;
    for (const auto& t : split_list(c.get("transform"))) {
        if (t == "clr") {
            out.add("clr.tsv", io::matrix_table(clr_transform(m), m.sample_ids(), m.feature_ids()).to_string());
        } else if (t == "prop" || t == "proportions") {
            const auto p = close_to_proportions(m);
            out.add("proportions.tsv", io::matrix_table(p.values(), m.sample_ids(), m.feature_ids()).to_string());
        } else if (t == "pairwise") {
            const auto r = pairwise_logratios(m);
            Labels names;
            for (const auto& [j, k] : r.pairs) {
                names.push_back(m.feature_ids()[static_cast<std::size_t>(j)] + "/" + m.feature_ids()[static_cast<std::size_t>(k)]);
            }
            out.add("pairwise.tsv", io::matrix_table(r.values, m.sample_ids(), names).to_string());
        } else {
            fail(ErrorKind::Parse, "unknown transform '" + t + "': expected clr, prop or pairwise");
        }
    }
    if (out.files.empty()) fail(ErrorKind::InvalidArgument, "no transform requested");
    out.add("removed_features.txt", lines(z.removed_features));
    return out;
}

RunOutputs cmd_daa(const RunConfig& c) {
    const auto z = load_matrix(c, "matrix");
    const Outcome y = load_outcome(c, "outcome", z.matrix.sample_ids());
    const auto& t = c.get("transform");
    DaaTransform transform;
    if (t == "clr") transform = DaaTransform::Clr;
    else if (t == "prop" || t == "proportions") transform = DaaTransform::Proportions;
    else fail(ErrorKind::Parse, "daa transform must be clr or prop, got '" + t + "'");
    const ModelSpec spec = c.model_spec(y);
    const DaaResult r = daa(z.matrix, y, transform, spec);

    io::Table table;
    table.header = {"feature", "beta", "p_value", "p_adjusted", "converged", "error"};
    const double alpha = c.get_double("alpha");
    std::size_t significant = 0;
    for (const auto& row : r.rows) {
        table.rows.push_back({row.feature_id, format_double(row.beta), format_double(row.p_value),
                              format_double(row.p_adjusted), bool_text(row.converged), row.error});
        if (row.p_adjusted < alpha) ++significant;
    }
    io::KeyValueDoc summary;
    summary.set("notion", std::string(r.notion == DaaNotion::Clr ? "clr" : "relative"));
    summary.set("link", std::string(spec.link == Link::Logistic ? "logistic" : "identity"));
    summary.set("tests", r.rows.size());
    summary.set("alpha", alpha);
    summary.set("significant", significant);
    summary.set("seed", c.get("seed"));
    summary.set_list("removed", z.removed_features);

    RunOutputs out;
    out.add("daa.tsv", table.to_string());
    out.add("daa_summary.txt", summary.to_string());
    return out;
}

RunOutputs cmd_ratios(const RunConfig& c) {
    const auto z = load_matrix(c, "matrix");
    const auto& m = z.matrix;
    const Outcome y = load_outcome(c, "outcome", m.sample_ids());
    const ModelSpec spec = c.model_spec(y);
    RatioAnalysisOptions options;
    options.alpha = c.get_double("alpha");
    options.max_features = c.get_int("max_features");
    const auto r = differential_ratio_analysis(m, y, spec, options);

    io::Table tests;
    tests.header = {"numerator", "denominator", "beta", "p_value", "p_adjusted", "converged", "error"};
    std::size_t significant = 0;
    for (const auto& t : r.tests) {
        tests.rows.push_back({r.feature_ids[static_cast<std::size_t>(t.numerator)],
                              r.feature_ids[static_cast<std::size_t>(t.denominator)], format_double(t.beta),
                              format_double(t.p_value), format_double(t.p_adjusted), bool_text(t.converged), t.error});
        if (t.p_adjusted < options.alpha) ++significant;
    }
    io::Table attribution;
    attribution.header = {"feature", "attribution"};
    for (std::size_t j = 0; j < r.feature_ids.size(); ++j) {
        attribution.rows.push_back({r.feature_ids[j], format_double(r.attribution[j])});
    }
    io::KeyValueDoc summary;
    summary.set("link", std::string(spec.link == Link::Logistic ? "logistic" : "identity"));
    summary.set("tests", r.tests.size());
    summary.set("alpha", options.alpha);
    summary.set("significant", significant);
    summary.set("seed", c.get("seed"));
    summary.set_list("removed", z.removed_features);

    RunOutputs out;
    out.add("ratios.tsv", tests.to_string());
    out.add("attribution.tsv", attribution.to_string());
    out.add("ratios_summary.txt", summary.to_string());
    return out;
}

namespace {

/// Held-out matrix restricted to the training features; zeros are replaced but
/// no feature is removed so the columns line up with the model.
StrictlyPositiveMatrix load_test_matrix(const RunConfig& c, const Labels& features) {
    const CompositionMatrix raw = read_matrix(c, "test_matrix");
    std::map<std::string, Eigen::Index> position;
    for (Eigen::Index j = 0; j < raw.features(); ++j) position[raw.feature_ids()[static_cast<std::size_t>(j)]] = j;
    Eigen::MatrixXd values(raw.samples(), static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
        const auto it = position.find(features[j]);
        if (it == position.end()) fail(ErrorKind::FeatureMismatch, "test matrix lacks feature '" + features[j] + "'");
        values.col(static_cast<Eigen::Index>(j)) = raw.values().col(it->second);
    }
    ZeroPolicy policy = c.zero_policy();
    policy.max_zero_fraction = 1.0;
    return apply_zero_policy(CompositionMatrix(values, raw.sample_ids(), features), policy).matrix;
}

std::string metric_name(const Outcome& y) { return y.kind == OutcomeKind::Binary ? "auc" : "r2"; }

} // namespace

RunOutputs cmd_learn(const RunConfig& c) {
    const auto z = load_matrix(c, "matrix");
    const auto& m = z.matrix;
    const Outcome y = load_outcome(c, "outcome", m.sample_ids());
    const ModelSpec spec = c.model_spec(y);
    const LearnedModel model = learn(c.learner(), m, y, spec, c.learner_config(), c.mode());

    io::Table metrics;
    metrics.header = {"split", "metric", "value"};
    metrics.rows.push_back({"train", metric_name(y), format_double(outcome_score(y, model.fitted))});
    metrics.rows.push_back({"cv", metric_name(y) + "_mean", format_double(model.cv.mean)});
    metrics.rows.push_back({"cv", metric_name(y) + "_se", format_double(model.cv.se)});
    if (c.has("test_matrix") || c.has("test_outcome")) {
        require(c, "test_matrix");
        require(c, "test_outcome");
        const auto test = load_test_matrix(c, model.feature_ids);
        const Outcome y_test = load_outcome(c, "test_outcome", test.sample_ids());
        metrics.rows.push_back({"test", metric_name(y_test), format_double(outcome_score(y_test, predict(model, test)))});
    }
    metrics.rows.push_back({"train", "active", std::to_string(model.biomarker.active())});

    io::Table loss;
    loss.header = {"step", "value"};
    for (std::size_t i = 0; i < model.loss_curve.size(); ++i) {
        loss.rows.push_back({std::to_string(i), format_double(model.loss_curve[i])});
    }

    RunOutputs out;
    out.add("model.txt", serialize(model).to_string());
    out.add("metrics.tsv", metrics.to_string());
    out.add("loss.tsv", loss.to_string());
    return out;
}

namespace {

std::string direction_text(Direction d) {
    switch (d) {
    case Direction::Up: return "+";
    case Direction::Down: return "-";
    case Direction::None: return "0";
    }
    return "?";
}

BiasModel random_bias(const RunConfig& c, Eigen::Index n, Eigen::Index g, bool noisy) {
    auto rng = make_stream(c.get_seed(), 0x62696173); // "bias"
    std::normal_distribution<double> normal(0.0, 1.0);
    BiasModel b;
    const double bias_sd = c.get_double("bias_sd");
    const double depth_sd = c.get_double("depth_sd");
    const double depth = c.get_double("depth");
    b.feature_bias.resize(g);
    for (Eigen::Index j = 0; j < g; ++j) b.feature_bias[j] = std::exp(bias_sd * normal(rng));
    b.depth.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) b.depth[i] = depth * std::exp(depth_sd * normal(rng));
    b.noise_sd = noisy ? c.get_double("measurement_sd") : 0.0;
    b.validate();
    return b;
}

} // namespace

RunOutputs cmd_simulate(const RunConfig& c) {
    const std::string preset = c.get("preset");
    const auto seed = c.get_seed();
    const int n = static_cast<int>(c.get_int("samples"));
    const int g = static_cast<int>(c.get_int("features"));
    RunOutputs out;
    io::KeyValueDoc scenario;
    scenario.set("preset", preset);
    scenario.set("seed", c.get("seed"));

    if (preset == "paired") {
        PairedOptions options;
        options.signal_features = static_cast<int>(c.get_int("signal_features"));
        options.loading = c.get_double("loading");
        options.log_noise_sd = c.get_double("log_noise_sd");
        const auto p = paired_omics_scenario(n, g, static_cast<int>(c.get_int("features2")), seed, options);
        out.add("T.tsv", io::matrix_table(p.t.values(), p.t.sample_ids(), p.t.feature_ids()).to_string());
        out.add("U.tsv", io::matrix_table(p.u.values(), p.u.sample_ids(), p.u.feature_ids()).to_string());
        out.add("factor.tsv", vector_table(p.t.sample_ids(), "sample", {{"factor", p.factor}}));
        scenario.set("samples", n);
        scenario.set("features.T", static_cast<int>(p.t.features()));
        scenario.set("features.U", static_cast<int>(p.u.features()));
        out.add("scenario.txt", scenario.to_string());
        return out;
    }

    GroundTruthScenario s;
    BiasModel bias;
    if (preset == "three-feature") {
        s = three_feature_scenario();
        bias = BiasModel::identity(s.true_abundances.rows(), s.true_abundances.cols());
    } else if (preset == "planted" || preset == "zero-noise") {
        PlantedOptions options;
        options.log_noise_sd = c.get_double("log_noise_sd");
        s = planted_signal_scenario(n, g, c.get_double("effect"), seed, options);
        bias = random_bias(c, s.true_abundances.rows(), s.true_abundances.cols(), preset == "planted");
    } else {
        fail(ErrorKind::Parse, "unknown preset '" + preset + "': expected planted, three-feature, zero-noise or paired");
    }
    const CompositionMatrix observed = observe(s, bias, seed);

    Eigen::VectorXd group(static_cast<Eigen::Index>(s.group.size()));
    for (std::size_t i = 0; i < s.group.size(); ++i) group[static_cast<Eigen::Index>(i)] = s.group[i];

    io::Table report;
    report.header = {"feature", "absolute", "relative", "presential"};
    for (const auto& f : s.feature_ids) {
        const auto r = da_notion_report(s, observed, f);
        report.rows.push_back({f, direction_text(r.absolute), direction_text(r.relative), direction_text(r.presential)});
    }

    out.add("true.tsv", io::matrix_table(s.true_abundances, s.sample_ids, s.feature_ids).to_string());
    out.add("observed.tsv", io::matrix_table(observed.values(), observed.sample_ids(), observed.feature_ids()).to_string());
    out.add("labels.tsv", vector_table(s.sample_ids, "sample", {{"group", group}}));
    out.add("feature_bias.tsv", vector_table(s.feature_ids, "feature", {{"bias", bias.feature_bias}}));
    out.add("depth.tsv", vector_table(s.sample_ids, "sample", {{"depth", bias.depth}}));
    out.add("da_report.tsv", report.to_string());

    scenario.set("samples", static_cast<int>(s.true_abundances.rows()));
    scenario.set("features", static_cast<int>(s.true_abundances.cols()));
    scenario.set("measurement_sd", bias.noise_sd);
    if (s.planted) {
        scenario.set("planted.effect", s.planted->effect);
        scenario.set_list("planted.numerator", ids_of(s.planted->biomarker.numerator, s.feature_ids));
        scenario.set_list("planted.denominator", ids_of(s.planted->biomarker.denominator, s.feature_ids));
    }
    out.add("scenario.txt", scenario.to_string());
    return out;
}

namespace {

int block_index(const RunConfig& c, const std::string& key) {
    const auto& v = c.get(key);
    if (v == "T" || v == "t") return 0;
    if (v == "U" || v == "u") return 1;
    fail(ErrorKind::Parse, "--" + flag_name(key) + " must be T or U, got '" + v + "'");
}

struct Blocks {
    StrictlyPositiveMatrix t;
    std::optional<StrictlyPositiveMatrix> u;
};

Blocks load_blocks(const RunConfig& c) {
    Blocks b{load_matrix(c, "matrix").matrix, std::nullopt};
    if (c.has("matrix2")) b.u = align_samples(load_matrix(c, "matrix2").matrix, b.t.sample_ids());
    return b;
}

BenchmarkOptions benchmark_options(const RunConfig& c) {
    BenchmarkOptions o;
    o.learner = c.learner_config();
    o.mode = c.mode();
    o.raw = c.get_bool("raw");
    o.network.hidden_units = static_cast<int>(c.get_int("hidden_units"));
    o.network.epochs = static_cast<int>(c.get_int("nn_epochs"));
    o.network.learning_rate = c.get_double("nn_learning_rate");
    o.network.seed = c.get_seed();
    return o;
}

std::string biomarker_doc(const BenchmarkResult& r, const Labels& features) {
    io::KeyValueDoc doc;
    doc.set("latent", r.row.latent_label());
    doc.set("active", r.active);
    doc.set("features", r.features);
    doc.set_list("numerator", ids_of(r.biomarker.numerator, features));
    doc.set_list("denominator", ids_of(r.biomarker.denominator, features));
    return doc.to_string();
}

} // namespace

RunOutputs cmd_approx(const RunConfig& c) {
    const Blocks b = load_blocks(c);
    const std::string latent = c.get("latent");
    BenchmarkRow row;
    if (latent == "pca") row.method = LatentMethod::Pca;
    else if (latent == "pls") row.method = LatentMethod::Pls;
    else if (latent == "nn") row.method = LatentMethod::Nn;
    else fail(ErrorKind::Parse, "--latent must be pca, pls or nn, got '" + latent + "'");
    row.target = block_index(c, "target");
    row.source = block_index(c, "source");
    if ((row.target == 1 || row.source == 1 || row.method == LatentMethod::Pls) && !b.u) {
        fail(ErrorKind::InvalidArgument, "--matrix2 is required for this latent");
    }
    const BenchmarkResult r = run_benchmark_row(row, b.t, b.u, benchmark_options(c));
    if (!r.ok) throw std::runtime_error(r.error);
    const auto& source = row.source == 0 ? b.t : *b.u;

    RunOutputs out;
    out.add("approx.tsv", benchmark_table({r}).to_string());
    out.add("biomarker.txt", biomarker_doc(r, source.feature_ids()));
    out.add("scores.tsv", vector_table(b.t.sample_ids(), "sample", {{"latent", r.latent}, {"rbb", r.approximation}}));
    return out;
}

RunOutputs cmd_benchmark(const RunConfig& c) {
    const Blocks b = load_blocks(c);
    const auto results = run_benchmark(b.t, b.u, benchmark_options(c));
    io::Table biomarkers;
    biomarkers.header = {"latent", "rbb_source", "numerator", "denominator"};
    for (const auto& r : results) {
        const auto& features = (r.row.source == 0 ? b.t : *b.u).feature_ids();
        biomarkers.rows.push_back({r.row.latent_label(), r.row.source == 0 ? "T" : "U",
                                   join(ids_of(r.biomarker.numerator, features)),
                                   join(ids_of(r.biomarker.denominator, features))});
    }
    RunOutputs out;
    out.add("benchmark.tsv", benchmark_table(results).to_string());
    out.add("benchmark_biomarkers.tsv", biomarkers.to_string());
    return out;
}

namespace {

const char* output_help =
    "Outputs (tab separated, columns in this order):\n"
    "  transform  clr.tsv, proportions.tsv, pairwise.tsv: sample, one column per feature or ratio 'a/b'\n"
    "  daa        daa.tsv: feature, beta, p_value, p_adjusted, converged, error\n"
    "  ratios     ratios.tsv: numerator, denominator, beta, p_value, p_adjusted, converged, error\n"
    "             attribution.tsv: feature, attribution\n"
    "  learn      model.txt (key = value), metrics.tsv: split, metric, value; loss.tsv: step, value\n"
    "  simulate   true.tsv, observed.tsv, labels.tsv: sample, group; da_report.tsv: feature, absolute,\n"
    "             relative, presential; paired preset: T.tsv, U.tsv, factor.tsv\n"
    "  approx     approx.tsv (benchmark columns), scores.tsv: sample, latent, rbb\n"
    "  benchmark  benchmark.tsv: objective, latent, original_r2, rbb_source, rbb_vars, rbb_r2, status\n"
    "Every run also writes run_manifest.txt; pass it back with --config to repeat the run.\n"
    "Exit codes: 0 success, 1 other failure, 2 parse or usage error, 3 failed precondition, 4 no convergence.\n";

using Command = RunOutputs (*)(const RunConfig&);

const std::vector<std::pair<std::string, std::pair<Command, std::string>>>& commands() {
    static const std::vector<std::pair<std::string, std::pair<Command, std::string>>> list = {
        {"transform", {cmd_transform, "write clr, proportion and pairwise log-ratio matrices"}},
        {"daa", {cmd_daa, "per-feature differential abundance"}},
        {"ratios", {cmd_ratios, "differential analysis of every pairwise log-ratio"}},
        {"learn", {cmd_learn, "learn a ratio biomarker"}},
        {"simulate", {cmd_simulate, "generate a synthetic scenario"}},
        {"approx", {cmd_approx, "approximate one latent variable with a ratio biomarker"}},
        {"benchmark", {cmd_benchmark, "latent versus ratio-biomarker reconstruction table"}},
    };
    return list;
}

std::vector<std::pair<std::string, std::string>> referenced_inputs(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> inputs;
    for (const auto& key : path_keys) {
        if (!c.has(key)) continue;
        const std::filesystem::path p = c.get(key);
        if (!std::filesystem::is_regular_file(p)) fail(ErrorKind::Path, key + " file not found: " + p.string());
        inputs.emplace_back(key, p.string());
    }
    return inputs;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ratio-based biomarker analysis of compositional data", "rbb"};
    app.footer(output_help);
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(tool_version));

    std::map<std::string, std::string> flags;
    std::string config_path;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands()) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->add_option("--config", config_path, "key = value settings file or a previous run_manifest.txt");
        for (const auto& spec : option_specs()) {
            sub->add_option("--" + flag_name(spec.key), flags[spec.key], spec.help + " [" + spec.default_value + "]");
        }
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return ExitParse;
    }

    try {
        const auto start = std::chrono::steady_clock::now();
        RunConfig config = RunConfig::defaults();
        Command command = nullptr;
        for (const auto& [name, entry] : commands()) {
            if (subs[name]->parsed()) {
                config.subcommand = name;
                command = entry.first;
            }
        }
        if (!config_path.empty()) config.load_file(config_path);
        for (const auto& spec : option_specs()) {
            const auto* opt = subs[config.subcommand]->get_option("--" + flag_name(spec.key));
            if (opt->count() > 0) config.set(spec.key, flags[spec.key]);
        }
        const auto inputs = referenced_inputs(config);
        const RunOutputs outputs = command(config);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_outputs(config, outputs, inputs, seconds);
        out << config.subcommand << ": wrote " << outputs.files.size() + 1 << " files to " << config.get("out_dir") << "\n";
        return ExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return ExitFailure;
    }
}

} // namespace rbb::cli

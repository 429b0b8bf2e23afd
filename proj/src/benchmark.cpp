#include "rbb/benchmark.hpp"

#include <future>

#include "rbb/error.hpp"

namespace rbb {

std::string_view to_string(LatentMethod method) {
    switch (method) {
    case LatentMethod::Pca: return "PCA";
    case LatentMethod::Pls: return "PLS";
    case LatentMethod::Nn: return "NN";
    }
    return "unknown";
}

namespace {

const char* block_name(int b) { return b == 0 ? "T" : "U"; }

} // namespace

std::string BenchmarkRow::latent_label() const {
    const std::string t = block_name(target);
    const std::string s = block_name(source);
    switch (method) {
    case LatentMethod::Pca: return "PCA(" + t + ")";
    case LatentMethod::Pls: return "PLS(T,U)." + std::string(target == 0 ? "t" : "u");
    case LatentMethod::Nn: return "NN(" + s + "->" + t + ")";
    }
    return "?";
}

std::vector<BenchmarkRow> benchmark_rows(bool paired) {
    std::vector<BenchmarkRow> rows;
    if (!paired) {
        rows.push_back({LatentMethod::Pca, 0, 0});
        rows.push_back({LatentMethod::Nn, 0, 0});
        return rows;
    }
    for (int objective = 0; objective < 2; ++objective) {
        for (LatentMethod method : {LatentMethod::Pca, LatentMethod::Pls, LatentMethod::Nn}) {
            for (int target = 0; target < 2; ++target) {
                const int source = objective == 0 ? target : 1 - target;
                rows.push_back({method, target, source});
            }
        }
    }
    return rows;
}

namespace {

BenchmarkResult run_row(const BenchmarkRow& row, std::size_t index, const StrictlyPositiveMatrix* blocks[2],
                        const Eigen::MatrixXd* transformed[2], const BenchmarkOptions& options) {
    BenchmarkResult r;
    r.row = row;
    try {
        if (!blocks[row.target] || !blocks[row.source]) {
            fail(ErrorKind::InvalidArgument, "row needs a second matrix");
        }
        const Eigen::MatrixXd& target = *transformed[row.target];
        LearnerConfig learner = options.learner;
        learner.seed = options.learner.seed + index;

        LatentRepresentation h;
        Decoder decoder;
        EncoderDecoder network;
        switch (row.method) {
        case LatentMethod::Pca:
            h = pca_first_component(target, block_name(row.target)).latent;
            break;
        case LatentMethod::Pls: {
            if (!blocks[1]) fail(ErrorKind::InvalidArgument, "PLS needs two matrices");
            PlsResult pls = pls_first_component(*transformed[0], *transformed[1], {}, "T", "U");
            h = row.target == 0 ? pls.x_side : pls.y_side;
            break;
        }
        case LatentMethod::Nn: {
            EncoderDecoderConfig net_cfg = options.network;
            net_cfg.seed = options.network.seed + index;
            auto trained = encoder_decoder_latent(*transformed[row.source], target, net_cfg, row.latent_label());
            h = trained.latent;
            network = std::move(trained.network);
            decoder = [&network](const Eigen::VectorXd& scores) { return network.decode(scores); };
            break;
        }
        }
        RbbApproximation approx =
            approximate_latent_with_rbb(h, *blocks[row.source], learner, options.mode, target, decoder);
        r.original_r2 = approx.latent_r2;
        r.rbb_r2 = approx.rbb_r2;
        r.active = approx.active;
        r.features = approx.features;
        r.biomarker = approx.model.biomarker;
        r.latent = h.scores;
        r.approximation = approx.approximation;
        r.ok = true;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

Eigen::MatrixXd latent_input(const StrictlyPositiveMatrix& m, bool raw) {
    return raw ? m.values() : clr_transform(m);
}

void check_pairing(const StrictlyPositiveMatrix& t, const std::optional<StrictlyPositiveMatrix>& u,
                   const BenchmarkOptions& options) {
    options.learner.validate();
    if (u) {
        if (u->samples() != t.samples()) fail(ErrorKind::DimensionMismatch, "paired matrices have different sample counts");
        if (u->sample_ids() != t.sample_ids()) fail(ErrorKind::DimensionMismatch, "paired matrices list different samples");
    }
}

} // namespace

BenchmarkResult run_benchmark_row(const BenchmarkRow& row, const StrictlyPositiveMatrix& t,
                                  const std::optional<StrictlyPositiveMatrix>& u, const BenchmarkOptions& options,
                                  std::size_t index) {
    check_pairing(t, u, options);
    const Eigen::MatrixXd t_in = latent_input(t, options.raw);
    const Eigen::MatrixXd u_in = u ? latent_input(*u, options.raw) : Eigen::MatrixXd();
    const StrictlyPositiveMatrix* blocks[2] = {&t, u ? &*u : nullptr};
    const Eigen::MatrixXd* transformed[2] = {&t_in, u ? &u_in : nullptr};
    return run_row(row, index, blocks, transformed, options);
}

std::vector<BenchmarkResult> run_benchmark(const StrictlyPositiveMatrix& t, const std::optional<StrictlyPositiveMatrix>& u,
                                           const BenchmarkOptions& options) {
    check_pairing(t, u, options);
    const Eigen::MatrixXd t_in = latent_input(t, options.raw);
    const Eigen::MatrixXd u_in = u ? latent_input(*u, options.raw) : Eigen::MatrixXd();
    const StrictlyPositiveMatrix* blocks[2] = {&t, u ? &*u : nullptr};
    const Eigen::MatrixXd* transformed[2] = {&t_in, u ? &u_in : nullptr};

    const auto rows = benchmark_rows(u.has_value());
    std::vector<BenchmarkResult> results(rows.size());
    if (options.parallel) {
        std::vector<std::future<BenchmarkResult>> jobs;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] { return run_row(rows[i], i, blocks, transformed, options); }));
        }
        for (std::size_t i = 0; i < rows.size(); ++i) results[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) results[i] = run_row(rows[i], i, blocks, transformed, options);
    }
    return results;
}

io::Table benchmark_table(const std::vector<BenchmarkResult>& results) {
    io::Table table;
    table.header = {"objective", "latent", "original_r2", "rbb_source", "rbb_vars", "rbb_r2", "status"};
    for (const auto& r : results) {
        std::vector<std::string> row = {r.row.integration() ? "integration" : "reduction", r.row.latent_label()};
        if (r.ok) {
            row.push_back(io::format_double(r.original_r2));
            row.push_back(block_name(r.row.source));
            row.push_back(std::to_string(r.active) + "/" + std::to_string(r.features));
            row.push_back(io::format_double(r.rbb_r2));
            row.push_back("ok");
        } else {
            row.insert(row.end(), {"", block_name(r.row.source), "", "", "error: " + r.error});
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace rbb

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbb/biomarker.hpp"
#include "rbb/io.hpp"
#include "rbb/latent.hpp"

namespace rbb {

enum class LatentMethod { Pca, Pls, Nn };

std::string_view to_string(LatentMethod method);

/// One comparison row. Block 0 is T, block 1 is U. The latent describes
/// `target` (PCA of it, the PLS side belonging to it, or the network's output
/// block); the RBB is learned on `source`. Dimension reduction when the two agree.
struct BenchmarkRow {
    LatentMethod method = LatentMethod::Pca;
    int target = 0;
    int source = 0;

    bool integration() const { return target != source; }
    std::string latent_label() const;
};

struct BenchmarkOptions {
    LearnerConfig learner;
    AggregationMode mode = AggregationMode::Balance;
    EncoderDecoderConfig network;
    /// Latents are computed on clr-transformed blocks unless set.
    bool raw = false;
    /// Rows run concurrently when true; results do not depend on it.
    bool parallel = true;
};

struct BenchmarkResult {
    BenchmarkRow row;
    bool ok = false;
    std::string error;
    double original_r2 = 0.0;
    double rbb_r2 = 0.0;
    std::size_t active = 0;
    std::size_t features = 0;
    RatioBiomarker biomarker;
    Eigen::VectorXd latent;
    Eigen::VectorXd approximation;
};

/// All rows computable from the supplied blocks: PCA and NN dimension
/// reduction for one block; the full 12-row grid for two.
std::vector<BenchmarkRow> benchmark_rows(bool paired);

/// Runs each row; a failing row is reported in its result and the rest still run.
std::vector<BenchmarkResult> run_benchmark(const StrictlyPositiveMatrix& t, const std::optional<StrictlyPositiveMatrix>& u,
                                           const BenchmarkOptions& options);

/// A single row; `index` offsets the learner and network seeds.
BenchmarkResult run_benchmark_row(const BenchmarkRow& row, const StrictlyPositiveMatrix& t,
                                  const std::optional<StrictlyPositiveMatrix>& u, const BenchmarkOptions& options,
                                  std::size_t index = 0);

io::Table benchmark_table(const std::vector<BenchmarkResult>& results);

} // namespace rbb

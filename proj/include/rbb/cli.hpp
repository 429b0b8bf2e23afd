#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rbb/biomarker.hpp"
#include "rbb/composition.hpp"
#include "rbb/error.hpp"
#include "rbb/glm.hpp"
#include "rbb/io.hpp"

namespace rbb::cli {

inline constexpr std::string_view tool_version = "1.0.0";

enum ExitCode : int {
    ExitOk = 0,
    ExitFailure = 1,
    ExitParse = 2,
    ExitPrecondition = 3,
    ExitConvergence = 4,
};

int exit_code_for(ErrorKind kind);

/// One configurable setting: key as used in config files and manifests, the
/// flag spelling is the key with '_' replaced by '-'.
struct OptionSpec {
    std::string key;
    std::string default_value;
    std::string help;
};

const std::vector<OptionSpec>& option_specs();

std::string flag_name(const std::string& key);

/// Resolved settings for one run. Values are layered as defaults, then the
/// config file, then flags.
class RunConfig {
public:
    std::string subcommand;

    /// Applies the key-value file at `path`. Keys may carry a "config." prefix
    /// (as written into manifests); unknown keys are ignored.
    void load_file(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    bool has(const std::string& key) const { return !get(key).empty(); }
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_seed() const;
    bool get_bool(const std::string& key) const;

    /// Every known key in declaration order.
    std::vector<std::pair<std::string, std::string>> entries() const;

    ZeroPolicy zero_policy() const;
    LearnerConfig learner_config() const;
    /// Link resolved against the outcome when link = auto.
    ModelSpec model_spec(const Outcome& y) const;
    io::OutcomeHint outcome_hint() const;
    AggregationMode mode() const;
    LearnerKind learner() const;

    static RunConfig defaults();

private:
    std::map<std::string, std::string> values_;
};

std::string sha256_hex(std::string_view data);

/// Files produced by a run, written together when the run completes.
struct RunOutputs {
    std::vector<std::pair<std::string, std::string>> files; // name relative to out_dir, content
    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

/// Manifest text: tool version, config echo, input digests, wall time, outputs.
std::string manifest_text(const RunConfig& config, const std::vector<std::pair<std::string, std::string>>& inputs,
                          double wall_seconds, const std::vector<std::string>& outputs);

/// Writes every output atomically, then `run_manifest.txt`.
void write_outputs(const RunConfig& config, const RunOutputs& outputs,
                   const std::vector<std::pair<std::string, std::string>>& inputs, double wall_seconds);

RunOutputs cmd_transform(const RunConfig& config);
RunOutputs cmd_daa(const RunConfig& config);
RunOutputs cmd_ratios(const RunConfig& config);
RunOutputs cmd_learn(const RunConfig& config);
RunOutputs cmd_simulate(const RunConfig& config);
RunOutputs cmd_approx(const RunConfig& config);
RunOutputs cmd_benchmark(const RunConfig& config);

/// Full command line entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rbb::cli

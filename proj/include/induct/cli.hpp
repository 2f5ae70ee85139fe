#pragma once

#include "induct/envs.hpp"
#include "induct/eval.hpp"
#include "induct/llm.hpp"
#include "induct/orchestrator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace induct::cli {

/// Bad configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace exit_code {
constexpr int ok = 0;
constexpr int failure = 1;
constexpr int bad_config = 2;
}  // namespace exit_code

struct RunConfig {
    std::string env = "blocksworld";
    std::vector<std::string> tasks{"1"};
    envs::Observability observability = envs::Observability::Full;
    double noise_probability = 0.0;
    std::filesystem::path data_dir = envs::default_data_dir();
    orchestrator::LoopConfig loop;
    orchestrator::ProposerSelection proposers;
    llm::EndpointConfig llm;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path out_dir = "runs";

    /// Throws ConfigError. Checks template and corpus files, and that the
    /// credential variable is set, when an llm role is selected.
    void validate() const;

    envs::EnvConfig env_config(const std::string& task, std::uint64_t seed) const;
    /// The endpoint settings, with the prompt directory defaulting to <data_dir>/prompts.
    llm::EndpointConfig endpoint() const;
    /// The loop settings with every random stream derived from `seed`.
    orchestrator::LoopConfig loop_config(std::uint64_t seed) const;
    /// Fully resolved, restricted to one task and seed when given.
    std::string to_json(const std::optional<std::string>& task = std::nullopt,
                        std::optional<std::uint64_t> seed = std::nullopt) const;
};

/// Parses a JSON config. Relative paths resolve against `base_dir`; unknown keys
/// are errors. Throws ConfigError.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> env;
    std::optional<std::string> task;
    std::optional<std::string> proposer;
    std::optional<std::filesystem::path> out;
};
void apply_overrides(RunConfig& cfg, const Overrides& o);

std::string metrics_json(const std::vector<eval::Metrics>& rows);

/// Trace file name for one run inside the output directory.
std::string trace_name(const std::string& env, const std::string& task, std::uint64_t seed);

struct ReplayResult {
    bool ok = false;
    std::size_t steps_checked = 0;
    /// 0-based index among all executed steps of the first divergence.
    std::optional<std::size_t> divergence;
    std::string message;
};

/// Re-executes a trace's recorded actions and resets against a fresh
/// environment built from its header, comparing every feedback. No proposer
/// (and so no endpoint) is involved.
ReplayResult replay(const std::string& trace_text);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_replay(const std::filesystem::path& trace, std::ostream& out, std::ostream& err);
int cmd_eval(const std::vector<std::filesystem::path>& traces, const std::optional<std::filesystem::path>& table,
             std::ostream& out, std::ostream& err);
int cmd_print_domain(const std::filesystem::path& trace, double threshold, std::ostream& out, std::ostream& err);
int cmd_plan(const std::filesystem::path& domain, const std::filesystem::path& problem, const std::string& search,
             double time_budget, std::ostream& out, std::ostream& err);

/// Argument parsing and dispatch for the `induct` tool.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace induct::cli

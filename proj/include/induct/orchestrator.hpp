#pragma once

#include "induct/belief.hpp"
#include "induct/envs.hpp"
#include "induct/llm.hpp"
#include "induct/planner.hpp"
#include "induct/proposer.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace induct::orchestrator {

class LoopError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by prospect() when not even the first action can be made applicable.
class ProspectionError : public LoopError {
public:
    using LoopError::LoopError;
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { Reset, ResetFree };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct LoopConfig {
    std::size_t prospection_k = 5;
    planner::PlannerConfig planner;
    belief::BeliefConfig belief;
    std::size_t max_resets = 50;
    std::size_t max_executed_steps = 1000;
    /// Safety net for iterations that execute nothing (edits, proposer failures).
    std::size_t max_iterations = 500;
    Mode mode = Mode::Reset;
    bool stepwise_detector = false;
    /// Seeds prospection resampling; domain sampling uses belief.seed.
    std::uint64_t seed = 0;
    std::filesystem::path retrieval_corpus;

    void validate() const;
};

struct Proposers {
    std::unique_ptr<proposer::TrajectorySampler> sampler;
    std::unique_ptr<proposer::SemanticsGenerator> semantics;
    std::unique_ptr<proposer::ErrorPredictor> error;
    std::unique_ptr<proposer::ProblemChecker> checker;
    std::unique_ptr<proposer::GoalProposer> goal;

    void validate() const;
};

/// Which implementation fills each role: "oracle", "heuristic" or "llm".
struct ProposerSelection {
    std::string sampler = "oracle";
    std::string semantics = "oracle";
    std::string error = "oracle";
    std::string checker = "oracle";
    std::string goal = "oracle";
    /// Corruption rate of the oracle sampler and semantics.
    double oracle_noise = 0.0;

    void set_all(const std::string& kind);
    bool uses_llm() const;
    void validate() const;
};

class Trace;

/// Builds the role implementations. `task` must outlive them. The LLM roles use
/// `transport` when given, HTTP otherwise; their exchanges go to `trace`.
Proposers make_proposers(const ProposerSelection& sel, const envs::Task& task, std::uint64_t seed,
                         const llm::EndpointConfig& llm_cfg, const std::filesystem::path& retrieval_corpus = {},
                         Trace* trace = nullptr, std::shared_ptr<llm::ChatTransport> transport = nullptr);

struct RunReport {
    bool success = false;
    /// goal_reached | reset_budget | step_budget | iteration_budget
    std::string termination;
    std::size_t resets = 0;
    std::size_t executed_steps = 0;
    std::size_t iterations = 0;
    /// Satisfied top-level conjuncts of the task goal in the final true state.
    double goal_fraction = 0.0;
    belief::Memory memory;
    pddl::Domain best_domain;
    pddl::Problem problem;
};

/// Append-only event log of a run, one JSON object per line, no timestamps.
class Trace {
public:
    static constexpr const char* schema = "induct-trace/1";

    /// Lines are also written to `out` as they are produced.
    explicit Trace(std::ostream* out = nullptr) : out_(out) {}

    void header(const std::string& config_json, const std::string& env, const std::string& task, std::uint64_t seed);
    void init(const pddl::Problem& problem, const std::string& goal_text);
    void iteration(std::size_t index, std::size_t resets, std::size_t steps, const pddl::Problem& problem,
                   const pddl::Domain& sampled, const planner::PlanResult& plan, const std::string& source,
                   const std::vector<pddl::GroundAction>& sampled_trajectory,
                   const std::optional<std::vector<pddl::GroundAction>>& executed);
    void step(std::size_t iteration, std::size_t index, const pddl::GroundAction& action,
              const envs::ExecutionFeedback& fb, bool mismatch, std::size_t steps);
    void reset(std::size_t resets, const std::string& cause);
    void edit(std::size_t iteration, const proposer::ProblemEdit& edit, bool accepted, const std::string& note);
    void error(std::size_t iteration, const proposer::PredictedError& e);
    void semantics(std::size_t iteration, const belief::ProposedSemantics& s);
    void belief(std::size_t iteration, const belief::Memory& m);
    void success_check(std::size_t iteration, const planner::PlanResult& plan);
    void proposer_failure(std::size_t iteration, const std::string& role, const std::string& message);
    void llm(const llm::Exchange& ex);
    void final(const RunReport& r);

    const std::vector<std::string>& lines() const { return lines_; }
    std::string text() const;

private:
    void emit(std::string line);

    std::ostream* out_;
    std::vector<std::string> lines_;
};

// Reading traces back.

struct TraceStep {
    std::size_t iteration = 0;
    std::size_t index = 0;
    pddl::GroundAction action;
    envs::StepStatus status = envs::StepStatus::NoChange;
    envs::Observation observation;
    bool mismatch = false;
    std::size_t steps = 0;
};

struct TraceReset {
    std::size_t resets = 0;
    std::string cause;
};

struct TraceIteration {
    std::size_t index = 0;
    std::string problem;
    std::string domain;
    std::string source;
    /// Empty optional: nothing was executed (prospection or proposer failure).
    std::optional<std::vector<pddl::GroundAction>> executed;
};

struct TraceFinal {
    bool success = false;
    std::string termination;
    std::size_t resets = 0;
    std::size_t executed_steps = 0;
    std::size_t iterations = 0;
    double goal_fraction = 0.0;
    std::string memory;
};

struct ParsedTrace {
    std::string config_json;
    std::string env;
    std::string task;
    std::uint64_t seed = 0;
    /// Steps and resets in execution order.
    std::vector<std::variant<TraceStep, TraceReset>> events;
    std::vector<TraceIteration> iterations;
    /// (iteration, serialized memory) after each update.
    std::vector<std::pair<std::size_t, std::string>> beliefs;
    std::vector<std::size_t> accepted_edits;
    std::size_t llm_exchanges = 0;
    std::optional<TraceFinal> final;
};

/// Throws TraceError on an unknown schema or a malformed record.
ParsedTrace read_trace(const std::string& text);

/// Objects and init transcribed from the observation; goal from the task text.
pddl::Problem init_problem(const envs::Observation& obs, const std::string& goal_text, const pddl::Domain& skeleton,
                           proposer::GoalProposer& goal);

/// Makes the first min(k, len) actions applicable under `domain` from the
/// problem's init. A bad action is replaced by one drawn uniformly from the
/// applicable ones; if there are none the trajectory is cut there.
std::vector<pddl::GroundAction> prospect(const std::vector<pddl::GroundAction>& trajectory, const pddl::Domain& domain,
                                         const pddl::Problem& problem, std::size_t k, std::mt19937_64& rng);

class Loop {
public:
    /// Resets the environment and initializes the problem.
    Loop(LoopConfig cfg, envs::Environment& env, Proposers& proposers, Trace* trace = nullptr);

    /// One pass of sample, verify, execute, learn. False once the run has ended.
    bool run_iteration();
    RunReport run();

    bool done() const { return done_; }
    const belief::Memory& memory() const { return memory_; }
    const pddl::Problem& problem() const { return problem_; }
    std::size_t resets() const { return resets_; }
    std::size_t executed_steps() const { return steps_; }
    const std::vector<proposer::Transition>& experience() const { return experience_; }
    RunReport report() const;

private:
    bool finish(const std::string& why, bool success = false);
    void learn(proposer::ProposerContext& ctx, std::size_t iteration);

    LoopConfig cfg_;
    envs::Environment& env_;
    Proposers& proposers_;
    Trace* trace_;
    pddl::Domain skeleton_;
    pddl::Problem problem_;
    pddl::Problem start_problem_;
    belief::Memory memory_;
    std::mt19937_64 domain_rng_;
    std::mt19937_64 prospect_rng_;
    std::vector<proposer::Transition> experience_;
    std::size_t resets_ = 0;
    std::size_t steps_ = 0;
    std::size_t iterations_ = 0;
    bool dirty_ = false;  // steps taken since the last return to the initial state
    bool done_ = false;
    bool success_ = false;
    std::string termination_;
};

}  // namespace induct::orchestrator

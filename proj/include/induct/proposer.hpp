#pragma once

#include "induct/belief.hpp"
#include "induct/envs.hpp"
#include "induct/pddl.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace induct::proposer {

class ProposerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One executed step as the agent saw it.
struct Transition {
    envs::Observation pre;
    pddl::GroundAction action;
    envs::StepStatus status = envs::StepStatus::NoChange;
    envs::Observation post;
    /// The step applied, but the stepwise detector flagged it.
    bool mismatch = false;
};

struct PredictedError {
    enum class Kind { UnsatisfiedPrecondition, UnreachedGoal };

    Kind kind = Kind::UnreachedGoal;
    std::optional<std::size_t> failing_action;
    /// Violated precondition literals (ground) or unmet goal conjuncts.
    std::vector<pddl::Condition> culprits;
    std::string explanation;

    void validate() const;
};
std::string to_string(PredictedError::Kind k);

struct ProblemEdit {
    std::set<pddl::Atom> atoms_to_add;
    std::set<pddl::Atom> atoms_to_remove;
    std::vector<pddl::TypedName> objects_to_add;

    bool empty() const { return atoms_to_add.empty() && atoms_to_remove.empty() && objects_to_add.empty(); }
};

/// Applies an edit and re-validates the result through the parser. Throws ProposerError.
pddl::Problem apply_edit(const pddl::Problem& p, const ProblemEdit& edit, const pddl::Domain& domain);

struct ProposerContext {
    pddl::Domain domain;    // sampled this iteration
    pddl::Domain skeleton;  // signatures only
    pddl::Problem problem;
    /// o_0..o_t of the current trajectory.
    std::vector<envs::Observation> observations;
    /// a_1..a_t actually executed, with their feedback.
    std::vector<pddl::GroundAction> actions;
    std::vector<envs::StepStatus> statuses;
    /// Index into `actions` of the step that failed or mismatched.
    std::optional<std::size_t> failure_index;
    std::vector<pddl::GroundAction> partial_plan;
    std::optional<PredictedError> error;
    /// Every transition seen so far in the run, across resets.
    const std::vector<Transition>* experience = nullptr;
    std::string goal_text;
    std::string rules_text;
    /// True when the problem init was taken at the task's reset state (not reset-free).
    bool starts_at_task_init = true;

    void validate() const;
};

class TrajectorySampler {
public:
    virtual ~TrajectorySampler() = default;
    virtual std::string name() const = 0;
    virtual std::vector<pddl::GroundAction> sample_trajectory(const ProposerContext& ctx) = 0;
};

class SemanticsGenerator {
public:
    virtual ~SemanticsGenerator() = default;
    virtual std::string name() const = 0;
    virtual belief::ProposedSemantics generate_semantics(const ProposerContext& ctx) = 0;
};

class ErrorPredictor {
public:
    virtual ~ErrorPredictor() = default;
    virtual std::string name() const = 0;
    virtual PredictedError predict_error(const ProposerContext& ctx) = 0;
};

class ProblemChecker {
public:
    virtual ~ProblemChecker() = default;
    virtual std::string name() const = 0;
    virtual std::optional<ProblemEdit> check_problem(const ProposerContext& ctx) = 0;
};

/// Turns the task text into a goal over the initial problem's objects.
class GoalProposer {
public:
    virtual ~GoalProposer() = default;
    virtual std::string name() const = 0;
    virtual pddl::Condition propose_goal(const std::string& goal_text, const pddl::Problem& problem,
                                         const pddl::Domain& skeleton) = 0;
};

// Helpers shared by the implementations.

/// Lifts a ground atom onto an action's parameters: a constant becomes the i-th
/// parameter iff it equals the i-th argument. Atoms with other constants give nullopt.
std::optional<pddl::Atom> lift(const pddl::Atom& a, const pddl::GroundAction& action, const pddl::ActionSchema& schema);

/// Set-difference repair of the problem against what the observations show.
std::optional<ProblemEdit> observation_repair(const ProposerContext& ctx);

/// The partial plan, if it reaches the goal under the context's domain.
std::optional<std::vector<pddl::GroundAction>> solving_partial_plan(const ProposerContext& ctx);

// Ground-truth implementations. `noise` corrupts outputs at a seeded rate.

class OracleSampler : public TrajectorySampler {
public:
    OracleSampler(const envs::Task& task, double noise = 0.0, std::uint64_t seed = 0);
    std::string name() const override { return "oracle"; }
    std::vector<pddl::GroundAction> sample_trajectory(const ProposerContext& ctx) override;

private:
    const envs::Task& task_;
    double noise_;
    std::mt19937_64 rng_;
};

class OracleSemantics : public SemanticsGenerator {
public:
    OracleSemantics(const envs::Task& task, double noise = 0.0, std::uint64_t seed = 0);
    std::string name() const override { return "oracle"; }
    belief::ProposedSemantics generate_semantics(const ProposerContext& ctx) override;

private:
    const envs::Task& task_;
    double noise_;
    std::mt19937_64 rng_;
};

class OracleErrorPredictor : public ErrorPredictor {
public:
    explicit OracleErrorPredictor(const envs::Task& task) : task_(task) {}
    std::string name() const override { return "oracle"; }
    PredictedError predict_error(const ProposerContext& ctx) override;

private:
    const envs::Task& task_;
};

class OracleChecker : public ProblemChecker {
public:
    explicit OracleChecker(const envs::Task& task) : task_(task) {}
    std::string name() const override { return "oracle"; }
    std::optional<ProblemEdit> check_problem(const ProposerContext& ctx) override;

private:
    const envs::Task& task_;
};

class OracleGoalProposer : public GoalProposer {
public:
    explicit OracleGoalProposer(const envs::Task& task) : task_(task) {}
    std::string name() const override { return "oracle"; }
    pddl::Condition propose_goal(const std::string&, const pddl::Problem&, const pddl::Domain&) override;

private:
    const envs::Task& task_;
};

// Offline learners that only use what the agent has observed.

struct WalkConfig {
    std::size_t max_length = 12;
    /// Chance of taking a goal-improving step when one is predicted.
    double greed = 0.5;
};

class HeuristicSampler : public TrajectorySampler {
public:
    explicit HeuristicSampler(std::uint64_t seed = 0, WalkConfig cfg = {});
    std::string name() const override { return "heuristic"; }
    std::vector<pddl::GroundAction> sample_trajectory(const ProposerContext& ctx) override;

private:
    WalkConfig cfg_;
    std::mt19937_64 rng_;
};

class HeuristicSemantics : public SemanticsGenerator {
public:
    std::string name() const override { return "heuristic"; }
    belief::ProposedSemantics generate_semantics(const ProposerContext& ctx) override;
};

class HeuristicErrorPredictor : public ErrorPredictor {
public:
    std::string name() const override { return "heuristic"; }
    PredictedError predict_error(const ProposerContext& ctx) override;
};

class HeuristicChecker : public ProblemChecker {
public:
    std::string name() const override { return "heuristic"; }
    std::optional<ProblemEdit> check_problem(const ProposerContext& ctx) override;
};

/// Pattern-based goal reader: "X should be on top of Y", "defeat the X".
class HeuristicGoalProposer : public GoalProposer {
public:
    std::string name() const override { return "heuristic"; }
    pddl::Condition propose_goal(const std::string& goal_text, const pddl::Problem& problem,
                                 const pddl::Domain& skeleton) override;
};

/// Learns semantics for one action from transitions; exposed for tests.
belief::ActionSemantics induce_action(const pddl::ActionSchema& schema, const std::vector<Transition>& experience);

}  // namespace induct::proposer

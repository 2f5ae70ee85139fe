#pragma once

#include "induct/pddl.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace induct::planner {

enum class SearchMode { BreadthFirst, GreedyBestFirst };

struct PlannerConfig {
    std::chrono::duration<double> time_budget{30.0};
    std::size_t node_budget = 1'000'000;
    SearchMode search_mode = SearchMode::GreedyBestFirst;
};

struct PlanResult {
    enum class Status { Complete, Partial, Unsolvable, BudgetExhausted };

    Status status = Status::Unsolvable;
    /// Complete: the plan. Partial/BudgetExhausted: the prefix to the best explored state.
    std::vector<pddl::GroundAction> plan;
    std::size_t satisfied_goal_conjuncts = 0;
    std::size_t expanded_nodes = 0;

    bool complete() const { return status == Status::Complete; }
};

std::string to_string(PlanResult::Status s);

/// Forward state-space search from the problem's init under `domain`.
PlanResult plan(const pddl::Domain& domain, const pddl::Problem& problem, const PlannerConfig& cfg = {});

struct Validation {
    enum class Failure { None, Precondition, GoalMiss };

    bool valid = false;
    Failure failure = Failure::None;
    /// Index of the first inapplicable action, or plan.size() for a goal miss.
    std::size_t failing_index = 0;
    pddl::State final_state;
};

Validation validate_plan(const pddl::Domain& domain, const pddl::Problem& problem,
                         const std::vector<pddl::GroundAction>& plan);

/// Parses a plan file: one "(action arg ...)" per line; ';' comments and blank lines ignored.
std::vector<pddl::GroundAction> parse_plan(std::string_view text);

struct ExternalPlannerConfig {
    /// Shell command with {domain}, {problem} and {plan} placeholders.
    std::string command_template;
    std::filesystem::path working_directory;
};

class ExternalPlannerError : public std::runtime_error {
public:
    enum class Kind { ProcessFailure, UnparseablePlan, ValidationFailure };

    ExternalPlannerError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Runs an external planner process (e.g. Fast Downward) through a command template.
/// Invocations through one instance are serialized because they share the working directory.
class ExternalPlanner {
public:
    explicit ExternalPlanner(ExternalPlannerConfig cfg);

    PlanResult plan(const pddl::Domain& domain, const pddl::Problem& problem);

private:
    ExternalPlannerConfig cfg_;
    std::mutex mutex_;
};

PlanResult external_plan(const pddl::Domain& domain, const pddl::Problem& problem,
                         const ExternalPlannerConfig& cfg);

}  // namespace induct::planner

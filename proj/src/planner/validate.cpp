#include "induct/planner.hpp"

#include <sstream>

namespace induct::planner {

Validation validate_plan(const pddl::Domain& domain, const pddl::Problem& problem,
                         const std::vector<pddl::GroundAction>& plan) {
    Validation v;
    pddl::State state = problem.initial_state();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (!domain.find_action(plan[i].name)) throw pddl::PddlError("unknown action '" + plan[i].name + "'");
        auto next = pddl::successor(state, plan[i], domain, problem);
        if (!next) {
            v.failure = Validation::Failure::Precondition;
            v.failing_index = i;
            v.final_state = std::move(state);
            return v;
        }
        state = std::move(*next);
    }
    pddl::Condition goal = pddl::expand_exists(problem.goal, domain, problem);
    v.final_state = std::move(state);
    if (!pddl::holds(v.final_state, goal)) {
        v.failure = Validation::Failure::GoalMiss;
        v.failing_index = plan.size();
        return v;
    }
    v.valid = true;
    return v;
}

std::vector<pddl::GroundAction> parse_plan(std::string_view text) {
    std::vector<pddl::GroundAction> plan;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == ';') continue;
        plan.push_back(pddl::parse_ground_action(line));
    }
    return plan;
}

}  // namespace induct::planner

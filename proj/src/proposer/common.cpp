#include "induct/proposer.hpp"
#include "induct/planner.hpp"

#include <algorithm>

namespace induct::proposer {

std::string to_string(PredictedError::Kind k) {
    return k == PredictedError::Kind::UnsatisfiedPrecondition ? "unsatisfied_precondition" : "unreached_goal";
}

void PredictedError::validate() const {
    if (kind == Kind::UnsatisfiedPrecondition && !failing_action)
        throw ProposerError("unsatisfied-precondition error without a failing action");
    if (kind == Kind::UnreachedGoal && culprits.empty())
        throw ProposerError("unreached-goal error without unmet conjuncts");
}

void ProposerContext::validate() const {
    if (observations.size() != actions.size() + 1)
        throw ProposerError("context histories are misaligned: " + std::to_string(observations.size()) +
                            " observations for " + std::to_string(actions.size()) + " actions");
    if (statuses.size() != actions.size()) throw ProposerError("context statuses are misaligned");
    if (failure_index && *failure_index >= actions.size()) throw ProposerError("failure index out of range");
}

pddl::Problem apply_edit(const pddl::Problem& p, const ProblemEdit& edit, const pddl::Domain& domain) {
    pddl::Problem out = p;
    for (const auto& o : edit.objects_to_add)
        if (!out.object_type(o.name)) out.objects.push_back(o);
    for (const auto& a : edit.atoms_to_remove) out.init.erase(a);
    for (const auto& a : edit.atoms_to_add) out.init.insert(a);
    try {
        // a round trip through the parser checks predicates, arity and objects
        return pddl::parse_problem(pddl::print_problem(out), domain);
    } catch (const pddl::PddlError& e) {
        throw ProposerError(std::string("problem edit does not validate: ") + e.what());
    }
}

std::optional<pddl::Atom> lift(const pddl::Atom& a, const pddl::GroundAction& action, const pddl::ActionSchema& schema) {
    pddl::Atom out{a.predicate, {}};
    for (const auto& arg : a.args) {
        auto it = std::find(action.args.begin(), action.args.end(), arg);
        if (it == action.args.end()) return std::nullopt;
        out.args.push_back(schema.params.at(static_cast<std::size_t>(it - action.args.begin())).name);
    }
    return out;
}

namespace {

std::set<std::string> names(const envs::Observation& o) {
    std::set<std::string> s;
    for (const auto& x : o.known_objects) s.insert(x.name);
    return s;
}

bool within(const pddl::Atom& a, const std::set<std::string>& known) {
    return std::all_of(a.args.begin(), a.args.end(), [&](const std::string& x) { return known.count(x) != 0; });
}

}  // namespace

std::optional<ProblemEdit> observation_repair(const ProposerContext& ctx) {
    if (ctx.observations.empty()) return std::nullopt;
    ProblemEdit edit;
    const envs::Observation& o0 = ctx.observations.front();
    // observations after a fatal restart belong to another episode
    std::size_t usable = ctx.observations.size();
    for (std::size_t i = 0; i < ctx.statuses.size(); ++i) {
        if (ctx.statuses[i] == envs::StepStatus::EpisodeReset) {
            usable = i + 1;
            break;
        }
    }
    std::set<std::string> declared;
    for (const auto& o : ctx.problem.objects) declared.insert(o.name);
    for (std::size_t t = 0; t < usable; ++t)
        for (const auto& o : ctx.observations[t].known_objects)
            if (declared.insert(o.name).second) edit.objects_to_add.push_back(o);

    std::set<std::string> known = names(o0);
    for (const auto& a : o0.atoms.atoms)
        if (!ctx.problem.init.count(a)) edit.atoms_to_add.insert(a);
    for (const auto& a : ctx.problem.init)
        if (within(a, known) && !o0.atoms.contains(a)) edit.atoms_to_remove.insert(a);

    // atoms about objects first seen mid-trajectory were already true at the start:
    // the agent only changes what it has been next to
    for (std::size_t t = 1; t < usable; ++t) {
        const auto now = names(ctx.observations[t]);
        for (const auto& a : ctx.observations[t].atoms.atoms) {
            bool fresh = std::any_of(a.args.begin(), a.args.end(), [&](const std::string& x) { return !known.count(x); });
            if (fresh && within(a, now) && !ctx.problem.init.count(a)) edit.atoms_to_add.insert(a);
        }
        known.insert(now.begin(), now.end());
    }
    if (edit.empty()) return std::nullopt;
    return edit;
}

std::optional<std::vector<pddl::GroundAction>> solving_partial_plan(const ProposerContext& ctx) {
    if (ctx.partial_plan.empty()) return std::nullopt;
    try {
        if (planner::validate_plan(ctx.domain, ctx.problem, ctx.partial_plan).valid) return ctx.partial_plan;
    } catch (const pddl::PddlError&) {
    }
    return std::nullopt;
}

}  // namespace induct::proposer

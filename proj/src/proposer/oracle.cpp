#include "induct/planner.hpp"
#include "induct/proposer.hpp"

namespace induct::proposer {

namespace {

double draw(std::mt19937_64& rng) { return belief::uniform01(rng); }

}  // namespace

OracleSampler::OracleSampler(const envs::Task& task, double noise, std::uint64_t seed)
    : task_(task), noise_(noise), rng_(seed) {}

std::vector<pddl::GroundAction> OracleSampler::sample_trajectory(const ProposerContext& ctx) {
    if (auto p = solving_partial_plan(ctx)) return *p;
    std::vector<pddl::GroundAction> plan;
    try {
        if (!task_.reference_plan.empty() && planner::validate_plan(task_.domain, ctx.problem, task_.reference_plan).valid)
            plan = task_.reference_plan;
    } catch (const pddl::PddlError&) {
    }
    if (plan.empty()) {
        try {
            planner::PlannerConfig cfg;
            cfg.search_mode = planner::SearchMode::BreadthFirst;
            cfg.time_budget = std::chrono::duration<double>(10.0);
            auto r = planner::plan(task_.domain, ctx.problem, cfg);
            if (r.complete()) plan = r.plan;
        } catch (const pddl::PddlError&) {
        }
    }
    if (plan.empty()) {
        HeuristicSampler walk(rng_());
        plan = walk.sample_trajectory(ctx);
    }
    if (noise_ > 0.0) {
        auto all = pddl::enumerate_ground_actions(ctx.domain, ctx.problem);
        for (auto& a : plan)
            if (draw(rng_) < noise_ && !all.empty()) a = all[rng_() % all.size()];
    }
    return plan;
}

OracleSemantics::OracleSemantics(const envs::Task& task, double noise, std::uint64_t seed)
    : task_(task), noise_(noise), rng_(seed) {}

belief::ProposedSemantics OracleSemantics::generate_semantics(const ProposerContext&) {
    auto truth = belief::ProposedSemantics::from_domain(task_.domain);
    if (noise_ <= 0.0) return truth;
    // flip the polarity of a random share of the statements
    for (auto& [name, sem] : truth.actions) {
        for (auto kind : {belief::Kind::Pre, belief::Kind::Post}) {
            auto& tree = kind == belief::Kind::Pre ? sem.precondition : sem.effect;
            auto leaves = belief::decompose(name, kind, tree);
            std::vector<const belief::Statement*> ptrs;
            for (auto& s : leaves) {
                if (draw(rng_) < noise_) s.literal = belief::negate(s.literal);
                ptrs.push_back(&s);
            }
            tree = belief::assemble(ptrs);
        }
    }
    return truth;
}

PredictedError OracleErrorPredictor::predict_error(const ProposerContext& ctx) {
    ctx.validate();
    PredictedError e;
    if (ctx.failure_index) {
        const std::size_t i = *ctx.failure_index;
        e.kind = PredictedError::Kind::UnsatisfiedPrecondition;
        e.failing_action = i;
        const auto& action = ctx.actions[i];
        const auto* schema = task_.domain.find_action(action.name);
        if (!schema) throw ProposerError("unknown action '" + action.name + "'");
        auto g = pddl::ground(task_.domain, *schema, action.args, task_.problem);
        for (const auto& c : pddl::goal_conjuncts(g.precondition))
            if (!pddl::holds(ctx.observations[i].atoms, c)) e.culprits.push_back(c);
        e.explanation = e.culprits.empty() ? action.str() + " did not have its expected effect"
                                           : action.str() + " was not executable";
    } else {
        const pddl::State& last = ctx.observations.back().atoms;
        pddl::Condition goal = pddl::expand_exists(ctx.problem.goal, ctx.skeleton, ctx.problem);
        for (const auto& c : pddl::goal_conjuncts(goal))
            if (!pddl::holds(last, c)) e.culprits.push_back(c);
        if (e.culprits.empty()) throw ProposerError("the trajectory reached the goal; there is no error to predict");
        e.kind = PredictedError::Kind::UnreachedGoal;
        e.explanation = "the goal was not reached";
    }
    for (const auto& c : e.culprits) e.explanation += "\n  " + pddl::print_condition(c);
    return e;
}

std::optional<ProblemEdit> OracleChecker::check_problem(const ProposerContext& ctx) {
    if (!ctx.starts_at_task_init) return observation_repair(ctx);
    ProblemEdit edit;
    for (const auto& o : task_.problem.objects)
        if (!ctx.problem.object_type(o.name)) edit.objects_to_add.push_back(o);
    for (const auto& a : task_.problem.init)
        if (!ctx.problem.init.count(a)) edit.atoms_to_add.insert(a);
    for (const auto& a : ctx.problem.init)
        if (!task_.problem.init.count(a)) edit.atoms_to_remove.insert(a);
    if (edit.empty()) return std::nullopt;
    return edit;
}

pddl::Condition OracleGoalProposer::propose_goal(const std::string&, const pddl::Problem&, const pddl::Domain&) {
    return task_.problem.goal;
}

}  // namespace induct::proposer

#include "induct/proposer.hpp"

#include <algorithm>
#include <map>
#include <regex>

namespace induct::proposer {

using pddl::Atom;
using pddl::Condition;
using pddl::Literal;

namespace {

std::set<std::string> known_names(const envs::Observation& o) {
    std::set<std::string> s;
    for (const auto& x : o.known_objects) s.insert(x.name);
    return s;
}

std::set<Atom> lifted_state(const pddl::State& s, const pddl::GroundAction& a, const pddl::ActionSchema& schema) {
    std::set<Atom> out;
    for (const auto& atom : s.atoms)
        if (auto l = lift(atom, a, schema)) out.insert(*l);
    return out;
}

std::set<Atom> lifted_state(const envs::Observation& o, const pddl::GroundAction& a, const pddl::ActionSchema& schema) {
    return lifted_state(o.atoms, a, schema);
}

template <class T>
std::set<T> intersect(const std::set<T>& a, const std::set<T>& b) {
    std::set<T> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

}  // namespace

belief::ActionSemantics induce_action(const pddl::ActionSchema& schema, const std::vector<Transition>& experience) {
    std::vector<const Transition*> ok, failed;
    for (const auto& t : experience) {
        if (t.action.name != schema.name) continue;
        if (t.status == envs::StepStatus::Applied && !t.mismatch) ok.push_back(&t);
        else if (t.status != envs::StepStatus::Applied) failed.push_back(&t);
    }
    belief::ActionSemantics sem;
    if (ok.empty()) return sem;

    // lifted pre-states and effects of every success
    std::vector<std::set<Atom>> pres;
    std::vector<std::set<Literal>> effects;
    for (const Transition* t : ok) {
        pres.push_back(lifted_state(t->pre, t->action, schema));
        auto seen = intersect(known_names(t->pre), known_names(t->post));
        auto visible = [&](const Atom& a) {
            return std::all_of(a.args.begin(), a.args.end(), [&](const std::string& x) { return seen.count(x) != 0; });
        };
        std::set<Literal> eff;
        for (const auto& a : t->post.atoms.atoms)
            if (visible(a) && !t->pre.atoms.contains(a))
                if (auto l = lift(a, t->action, schema)) eff.insert(Literal{*l, false});
        for (const auto& a : t->pre.atoms.atoms)
            if (visible(a) && !t->post.atoms.contains(a))
                if (auto l = lift(a, t->action, schema)) eff.insert(Literal{*l, true});
        effects.push_back(std::move(eff));
    }

    std::set<Atom> always = pres[0];
    for (const auto& p : pres) always = intersect(always, p);
    std::set<Literal> common = effects[0];
    for (const auto& e : effects) common = intersect(common, e);

    // preconditions: what held before every success, plus negative literals
    // needed to tell a failure apart once all positive candidates held
    std::vector<Condition> pre;
    for (const auto& a : always) pre.push_back(Condition::lit(a));
    std::set<Atom> ever;
    for (const auto& p : pres) ever.insert(p.begin(), p.end());
    std::set<Atom> negatives;
    for (const Transition* t : failed) {
        auto lifted = lifted_state(t->pre, t->action, schema);
        if (!std::includes(lifted.begin(), lifted.end(), always.begin(), always.end())) continue;
        for (const auto& a : lifted)
            if (!ever.count(a)) negatives.insert(a);
    }
    for (const auto& a : negatives) pre.push_back(Condition::lit(a, true));
    sem.precondition = Condition::conj(std::move(pre));

    // effects: unconditional when seen every time, otherwise conditioned on what
    // distinguishes the successes that showed them
    std::vector<Condition> post;
    for (const auto& l : common) post.push_back(Condition::lit(l.atom, l.negated));
    std::map<std::set<Atom>, std::vector<Literal>> conditional;
    std::set<Literal> sometimes;
    for (const auto& e : effects)
        for (const auto& l : e)
            if (!common.count(l)) sometimes.insert(l);
    for (const auto& l : sometimes) {
        std::optional<std::set<Atom>> when;
        for (std::size_t i = 0; i < effects.size(); ++i) {
            if (!effects[i].count(l)) continue;
            when = when ? intersect(*when, pres[i]) : pres[i];
        }
        std::set<Atom> trigger;
        std::set_difference(when->begin(), when->end(), always.begin(), always.end(), std::inserter(trigger, trigger.end()));
        if (trigger.empty()) continue;
        conditional[trigger].push_back(l);
    }
    for (const auto& [trigger, lits] : conditional) {
        std::vector<Condition> ante, cons;
        for (const auto& a : trigger) ante.push_back(Condition::lit(a));
        for (const auto& l : lits) cons.push_back(Condition::lit(l.atom, l.negated));
        Condition antecedent = ante.size() == 1 ? ante[0] : Condition::conj(std::move(ante));
        post.push_back(Condition::when(std::move(antecedent), Condition::conj(std::move(cons))));
    }
    sem.effect = Condition::conj(std::move(post));
    return sem;
}

belief::ProposedSemantics HeuristicSemantics::generate_semantics(const ProposerContext& ctx) {
    if (!ctx.experience) throw ProposerError("heuristic semantics need an experience log");
    belief::ProposedSemantics out;
    for (const auto& a : ctx.skeleton.actions) out.actions[a.name] = induce_action(a, *ctx.experience);
    return out;
}

PredictedError HeuristicErrorPredictor::predict_error(const ProposerContext& ctx) {
    ctx.validate();
    PredictedError e;
    if (ctx.failure_index) {
        const std::size_t i = *ctx.failure_index;
        const auto& action = ctx.actions[i];
        e.kind = PredictedError::Kind::UnsatisfiedPrecondition;
        e.failing_action = i;
        if (const auto* schema = ctx.domain.find_action(action.name)) {
            auto g = pddl::ground(ctx.domain, *schema, action.args, ctx.problem);
            for (const auto& c : pddl::goal_conjuncts(g.precondition))
                if (!pddl::holds(ctx.observations[i].atoms, c)) e.culprits.push_back(c);
        }
        e.explanation = e.culprits.empty() ? action.str() + " behaved differently than believed"
                                           : action.str() + " needs conditions that did not hold";
    } else {
        pddl::Condition goal = pddl::expand_exists(ctx.problem.goal, ctx.skeleton, ctx.problem);
        for (const auto& c : pddl::goal_conjuncts(goal))
            if (!pddl::holds(ctx.observations.back().atoms, c)) e.culprits.push_back(c);
        if (e.culprits.empty()) throw ProposerError("the trajectory reached the goal; there is no error to predict");
        e.kind = PredictedError::Kind::UnreachedGoal;
        e.explanation = "the goal was not reached";
    }
    for (const auto& c : e.culprits) e.explanation += "\n  " + pddl::print_condition(c);
    return e;
}

std::optional<ProblemEdit> HeuristicChecker::check_problem(const ProposerContext& ctx) { return observation_repair(ctx); }

pddl::Condition HeuristicGoalProposer::propose_goal(const std::string& goal_text, const pddl::Problem& problem,
                                                    const pddl::Domain& skeleton) {
    std::string text = pddl::canonical(goal_text);
    static const std::regex on_top(R"(([a-z0-9_-]+) should be (?:on top of|on) ([a-z0-9_-]+))");
    static const std::regex on_table(R"(([a-z0-9_-]+) should be on the table)");
    static const std::regex defeat(R"(defeat the ([a-z0-9_-]+))");
    static const std::regex fetch(R"((?:pick up|get|collect) the ([a-z0-9_-]+))");
    std::vector<std::string> atoms;
    for (std::sregex_iterator it(text.begin(), text.end(), on_table), end; it != end; ++it)
        atoms.push_back("(on-table " + (*it)[1].str() + ")");
    for (std::sregex_iterator it(text.begin(), text.end(), on_top), end; it != end; ++it)
        if ((*it)[2].str() != "the") atoms.push_back("(on " + (*it)[1].str() + " " + (*it)[2].str() + ")");
    for (std::sregex_iterator it(text.begin(), text.end(), defeat), end; it != end; ++it)
        atoms.push_back("(" + (*it)[1].str() + "-defeated)");
    for (std::sregex_iterator it(text.begin(), text.end(), fetch), end; it != end; ++it)
        atoms.push_back("(has-" + (*it)[1].str() + ")");
    if (atoms.empty()) throw ProposerError("cannot read a goal from '" + goal_text + "'");
    std::string goal = "(and";
    for (const auto& a : atoms) goal += " " + a;
    goal += ")";
    try {
        return pddl::parse_condition(goal, skeleton, {}, pddl::ConditionRole::Goal, &problem);
    } catch (const pddl::PddlError& e) {
        throw ProposerError("goal '" + goal + "' does not fit the problem: " + e.what());
    }
}

HeuristicSampler::HeuristicSampler(std::uint64_t seed, WalkConfig cfg) : cfg_(cfg), rng_(seed) {}

std::vector<pddl::GroundAction> HeuristicSampler::sample_trajectory(const ProposerContext& ctx) {
    if (auto p = solving_partial_plan(ctx)) return *p;

    // what the agent has seen happen: (state, action) -> outcome
    struct Outcome {
        bool applied;
        pddl::State post;
    };
    std::map<std::set<Atom>, std::map<pddl::GroundAction, Outcome>> table;
    // lifted pre-states in which each action did not execute
    std::map<std::string, std::set<std::set<Atom>>> refused;
    if (ctx.experience) {
        for (const auto& t : *ctx.experience) {
            bool applied = t.status == envs::StepStatus::Applied && !t.mismatch;
            table[t.pre.atoms.atoms][t.action] = Outcome{applied, t.post.atoms};
            if (t.status != envs::StepStatus::Applied)
                if (const auto* schema = ctx.skeleton.find_action(t.action.name))
                    refused[t.action.name].insert(lifted_state(t.pre, t.action, *schema));
        }
    }
    // With positive preconditions, an action refused where a superset of the
    // current (lifted) facts held is refused here too.
    auto doomed = [&](const std::set<Atom>& here, const std::string& name) {
        auto it = refused.find(name);
        if (it == refused.end()) return false;
        for (const auto& f : it->second)
            if (std::includes(f.begin(), f.end(), here.begin(), here.end())) return true;
        return false;
    };
    auto believed = [&](const pddl::State& s, const pddl::GroundAction& a) {
        try {
            return pddl::applicable(s, a, ctx.domain, ctx.problem);
        } catch (const pddl::PddlError&) {
            return true;
        }
    };

    auto seen_at = [&](const pddl::State& s) -> const std::map<pddl::GroundAction, Outcome>* {
        auto it = table.find(s.atoms);
        return it == table.end() ? nullptr : &it->second;
    };
    auto predict = [&](const pddl::State& s, const pddl::GroundAction& a) -> std::optional<pddl::State> {
        const auto* seen = seen_at(s);
        auto it = seen ? seen->find(a) : std::map<pddl::GroundAction, Outcome>::const_iterator{};
        if (seen && it != seen->end()) {
            if (!it->second.applied) return std::nullopt;
            return it->second.post;
        }
        try {
            if (auto next = pddl::successor(s, a, ctx.domain, ctx.problem)) return next;
        } catch (const pddl::PddlError&) {
        }
        return s;  // unknown outcome: assume nothing visible changes
    };

    const pddl::Condition goal = pddl::expand_exists(ctx.problem.goal, ctx.skeleton, ctx.problem);
    const auto all = pddl::enumerate_ground_actions(ctx.skeleton, ctx.problem);
    if (all.empty()) throw ProposerError("no ground actions over the problem's objects");

    std::vector<pddl::GroundAction> traj;
    pddl::State s = ctx.problem.initial_state();
    for (const auto& a : ctx.partial_plan) {
        if (traj.size() >= cfg_.max_length) break;
        auto next = predict(s, a);
        if (!next) break;
        traj.push_back(a);
        s = std::move(*next);
    }

    while (traj.size() < cfg_.max_length && !pddl::holds(s, goal)) {
        std::map<std::string, std::vector<const pddl::GroundAction*>> novel, known, unlikely;
        std::vector<std::pair<const pddl::GroundAction*, pddl::State>> improving;
        const std::size_t here = pddl::satisfied_conjuncts(s, goal);
        const auto* seen = seen_at(s);

        // atoms by the objects they mention, so lifting an action only looks at its neighbourhood
        std::map<std::string, std::vector<const Atom*>> touching;
        std::vector<const Atom*> nullary;
        for (const auto& atom : s.atoms) {
            if (atom.args.empty()) nullary.push_back(&atom);
            for (const auto& o : std::set<std::string>(atom.args.begin(), atom.args.end())) touching[o].push_back(&atom);
        }
        auto lifted_here = [&](const pddl::GroundAction& a) {
            const auto& schema = *ctx.skeleton.find_action(a.name);
            std::set<Atom> out;
            for (const auto* atom : nullary) out.insert(*atom);
            for (const auto& o : std::set<std::string>(a.args.begin(), a.args.end())) {
                auto it = touching.find(o);
                if (it == touching.end()) continue;
                for (const auto* atom : it->second)
                    if (auto l = lift(*atom, a, schema)) out.insert(*l);
            }
            return out;
        };

        for (const auto& a : all) {
            auto it = seen ? seen->find(a) : std::map<pddl::GroundAction, Outcome>::const_iterator{};
            if (seen && it != seen->end()) {
                if (!it->second.applied) continue;  // known to fail here
                known[a.name].push_back(&a);
                if (pddl::satisfied_conjuncts(it->second.post, goal) > here) improving.emplace_back(&a, it->second.post);
            } else if (doomed(lifted_here(a), a.name) || !believed(s, a)) {
                unlikely[a.name].push_back(&a);
            } else {
                novel[a.name].push_back(&a);
            }
        }
        const pddl::GroundAction* pick = nullptr;
        if (!improving.empty() && belief::uniform01(rng_) < cfg_.greed) {
            pick = improving[rng_() % improving.size()].first;
        } else {
            auto& pool = !novel.empty() ? novel : !known.empty() ? known : unlikely;
            if (pool.empty()) break;
            auto schema = std::next(pool.begin(), static_cast<long>(rng_() % pool.size()));
            pick = schema->second[rng_() % schema->second.size()];
        }
        auto next = predict(s, *pick);
        traj.push_back(*pick);
        if (!next) break;
        s = std::move(*next);
    }
    if (traj.empty()) traj.push_back(all[rng_() % all.size()]);
    return traj;
}

}  // namespace induct::proposer

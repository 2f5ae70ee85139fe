#include "induct/pddl.hpp"

#include <algorithm>
#include <functional>

namespace induct::pddl {

namespace {

void collect_effect(const State& pre, const Condition& effect, std::set<Atom>& adds, std::set<Atom>& dels) {
    switch (effect.kind) {
        case Condition::Kind::Literal:
            if (!effect.literal.atom.is_ground()) throw PddlError("effect is not ground: " + effect.literal.str());
            (effect.literal.negated ? dels : adds).insert(effect.literal.atom);
            return;
        case Condition::Kind::And:
            for (const auto& c : effect.children) collect_effect(pre, c, adds, dels);
            return;
        case Condition::Kind::When:
            // antecedents always read the pre-state
            if (holds(pre, effect.children.at(0))) collect_effect(pre, effect.children.at(1), adds, dels);
            return;
        case Condition::Kind::Or:
            throw PddlError("ill-formed effect: 'or' inside an effect");
        case Condition::Kind::Exists:
            throw PddlError("ill-formed effect: 'exists' inside an effect");
    }
}

}  // namespace

void check_ground_action(const GroundAction& action, const Domain& domain, const Problem& problem) {
    const ActionSchema* schema = domain.find_action(action.name);
    if (!schema) throw PddlError("unknown action '" + action.name + "'");
    if (schema->params.size() != action.args.size()) {
        throw PddlError("arity mismatch for " + action.str() + ": expected " + std::to_string(schema->params.size()));
    }
    for (std::size_t i = 0; i < action.args.size(); ++i) {
        auto type = problem.object_type(action.args[i]);
        if (!type) throw PddlError("unknown object '" + action.args[i] + "' in " + action.str());
        if (!domain.is_subtype(*type, schema->params[i].type)) {
            throw PddlError("type violation in " + action.str() + ": '" + action.args[i] + "' is " + *type +
                            ", expected " + schema->params[i].type);
        }
    }
}

Condition substitute(const Condition& c, const std::map<std::string, std::string>& binding) {
    Condition out = c;
    switch (c.kind) {
        case Condition::Kind::Literal:
            for (auto& a : out.literal.atom.args) {
                auto it = binding.find(a);
                if (it != binding.end()) a = it->second;
            }
            return out;
        case Condition::Kind::Exists: {
            // quantified variables shadow the outer binding
            auto inner = binding;
            for (const auto& v : c.variables) inner.erase(v.name);
            out.children[0] = substitute(c.children[0], inner);
            return out;
        }
        default:
            for (auto& child : out.children) child = substitute(child, binding);
            return out;
    }
}

Condition expand_exists(const Condition& c, const Domain& domain, const Problem& problem) {
    if (c.kind == Condition::Kind::Literal) return c;
    if (c.kind != Condition::Kind::Exists) {
        Condition out = c;
        for (auto& child : out.children) child = expand_exists(child, domain, problem);
        return out;
    }
    std::vector<std::vector<std::string>> domains;
    for (const auto& v : c.variables) domains.push_back(problem.objects_of_type(domain, v.type));
    std::vector<Condition> disjuncts;
    std::map<std::string, std::string> binding;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == c.variables.size()) {
            disjuncts.push_back(expand_exists(substitute(c.children[0], binding), domain, problem));
            return;
        }
        for (const auto& obj : domains[i]) {
            binding[c.variables[i].name] = obj;
            rec(i + 1);
        }
    };
    rec(0);
    // zero disjuncts is the empty Or, which is false
    Condition out;
    out.kind = Condition::Kind::Or;
    out.children = std::move(disjuncts);
    return out;
}

GroundedAction ground(const Domain& domain, const ActionSchema& schema, std::span<const std::string> args,
                      const Problem& problem) {
    check_ground_action(GroundAction{schema.name, {args.begin(), args.end()}}, domain, problem);
    std::map<std::string, std::string> binding;
    for (std::size_t i = 0; i < args.size(); ++i) binding[schema.params[i].name] = args[i];
    return GroundedAction{
        expand_exists(substitute(schema.precondition, binding), domain, problem),
        expand_exists(substitute(schema.effect, binding), domain, problem),
    };
}

bool holds(const State& state, const Condition& cond) {
    switch (cond.kind) {
        case Condition::Kind::Literal:
            if (!cond.literal.atom.is_ground()) throw PddlError("condition has free variables: " + cond.literal.str());
            return state.contains(cond.literal.atom) != cond.literal.negated;
        case Condition::Kind::And:
            return std::all_of(cond.children.begin(), cond.children.end(),
                               [&](const Condition& c) { return holds(state, c); });
        case Condition::Kind::Or:
            return std::any_of(cond.children.begin(), cond.children.end(),
                               [&](const Condition& c) { return holds(state, c); });
        case Condition::Kind::Exists:
            throw PddlError("condition has unexpanded 'exists'");
        case Condition::Kind::When:
            throw PddlError("'when' cannot be evaluated as a condition");
    }
    return false;
}

State apply(const State& state, const Condition& effect) {
    std::set<Atom> adds, dels;
    collect_effect(state, effect, adds, dels);
    State out = state;
    for (const auto& a : dels) out.atoms.erase(a);
    for (const auto& a : adds) out.atoms.insert(a);
    return out;
}

bool applicable(const State& state, const GroundAction& action, const Domain& domain, const Problem& problem) {
    const ActionSchema* schema = domain.find_action(action.name);
    if (!schema) throw PddlError("unknown action '" + action.name + "'");
    return holds(state, ground(domain, *schema, action.args, problem).precondition);
}

std::optional<State> successor(const State& state, const GroundAction& action, const Domain& domain,
                               const Problem& problem) {
    const ActionSchema* schema = domain.find_action(action.name);
    if (!schema) throw PddlError("unknown action '" + action.name + "'");
    GroundedAction g = ground(domain, *schema, action.args, problem);
    if (!holds(state, g.precondition)) return std::nullopt;
    return apply(state, g.effect);
}

std::vector<Condition> goal_conjuncts(const Condition& goal) {
    if (goal.kind == Condition::Kind::And) return goal.children;
    return {goal};
}

std::size_t satisfied_conjuncts(const State& state, const Condition& goal) {
    std::size_t n = 0;
    for (const auto& c : goal_conjuncts(goal)) {
        if (holds(state, c)) ++n;
    }
    return n;
}

std::vector<GroundAction> enumerate_ground_actions(const Domain& domain, const Problem& problem) {
    std::vector<GroundAction> out;
    for (const auto& schema : domain.actions) {
        std::vector<std::vector<std::string>> choices;
        for (const auto& p : schema.params) choices.push_back(problem.objects_of_type(domain, p.type));
        GroundAction g{schema.name, std::vector<std::string>(schema.params.size())};
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == choices.size()) {
                out.push_back(g);
                return;
            }
            for (const auto& o : choices[i]) {
                g.args[i] = o;
                rec(i + 1);
            }
        };
        rec(0);
    }
    std::sort(out.begin(), out.end(), [](const GroundAction& a, const GroundAction& b) { return a.str() < b.str(); });
    return out;
}

}  // namespace induct::pddl

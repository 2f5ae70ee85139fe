#include "induct/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace induct::planner {

namespace {

using Bits = std::vector<std::uint64_t>;

struct BitsHash {
    std::size_t operator()(const Bits& b) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t w : b) {
            h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

bool test(const Bits& b, std::uint32_t i) { return (b[i >> 6] >> (i & 63)) & 1u; }
void set(Bits& b, std::uint32_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
void reset(Bits& b, std::uint32_t i) { b[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

struct CNode {
    enum class Kind { True, False, Lit, And, Or };
    Kind kind = Kind::True;
    std::uint32_t atom = 0;
    bool negated = false;
    std::vector<CNode> kids;

    bool eval(const Bits& s) const {
        switch (kind) {
            case Kind::True: return true;
            case Kind::False: return false;
            case Kind::Lit: return test(s, atom) != negated;
            case Kind::And:
                for (const auto& k : kids) if (!k.eval(s)) return false;
                return true;
            case Kind::Or:
                for (const auto& k : kids) if (k.eval(s)) return true;
                return false;
        }
        return false;
    }
};

struct CondEffect {
    CNode when;
    std::vector<std::uint32_t> adds;
    std::vector<std::uint32_t> dels;
};

struct Op {
    pddl::GroundAction action;
    CNode pre;
    std::vector<CondEffect> effects;
};

class Compiler {
public:
    std::uint32_t intern(const pddl::Atom& a) {
        auto [it, inserted] = index_.try_emplace(a, static_cast<std::uint32_t>(atoms_.size()));
        if (inserted) atoms_.push_back(a);
        return it->second;
    }

    CNode condition(const pddl::Condition& c) {
        CNode n;
        switch (c.kind) {
            case pddl::Condition::Kind::Literal:
                n.kind = CNode::Kind::Lit;
                n.atom = intern(c.literal.atom);
                n.negated = c.literal.negated;
                return n;
            case pddl::Condition::Kind::And:
            case pddl::Condition::Kind::Or:
                n.kind = c.kind == pddl::Condition::Kind::And ? CNode::Kind::And : CNode::Kind::Or;
                for (const auto& k : c.children) n.kids.push_back(condition(k));
                return n;
            default:
                throw pddl::PddlError("unexpected connector in a ground condition");
        }
    }

    void effects(const pddl::Condition& e, const std::vector<CNode>& guards, std::vector<CondEffect>& out) {
        switch (e.kind) {
            case pddl::Condition::Kind::Literal: {
                CondEffect ce;
                ce.when = conjoin(guards);
                (e.literal.negated ? ce.dels : ce.adds).push_back(intern(e.literal.atom));
                out.push_back(std::move(ce));
                return;
            }
            case pddl::Condition::Kind::And:
                for (const auto& k : e.children) effects(k, guards, out);
                return;
            case pddl::Condition::Kind::When: {
                auto inner = guards;
                inner.push_back(condition(e.children.at(0)));
                effects(e.children.at(1), inner, out);
                return;
            }
            default:
                throw pddl::PddlError("ill-formed effect: '" + e.str() + "'");
        }
    }

    std::size_t size() const { return atoms_.size(); }

private:
    static CNode conjoin(const std::vector<CNode>& guards) {
        if (guards.empty()) return CNode{};
        if (guards.size() == 1) return guards.front();
        CNode n;
        n.kind = CNode::Kind::And;
        n.kids = guards;
        return n;
    }

    struct AtomLess {
        bool operator()(const pddl::Atom& a, const pddl::Atom& b) const { return a < b; }
    };
    std::map<pddl::Atom, std::uint32_t, AtomLess> index_;
    std::vector<pddl::Atom> atoms_;
};

// Replace literals over atoms that no effect touches by their initial value.
CNode simplify(const CNode& n, const std::vector<bool>& fluent, const Bits& init) {
    switch (n.kind) {
        case CNode::Kind::True:
        case CNode::Kind::False:
            return n;
        case CNode::Kind::Lit:
            if (n.atom < fluent.size() && fluent[n.atom]) return n;
            return CNode{(test(init, n.atom) != n.negated) ? CNode::Kind::True : CNode::Kind::False, 0, false, {}};
        case CNode::Kind::And:
        case CNode::Kind::Or: {
            bool is_and = n.kind == CNode::Kind::And;
            CNode out;
            out.kind = n.kind;
            for (const auto& k : n.kids) {
                CNode s = simplify(k, fluent, init);
                if (s.kind == CNode::Kind::True) {
                    if (is_and) continue;
                    return s;
                }
                if (s.kind == CNode::Kind::False) {
                    if (!is_and) continue;
                    return s;
                }
                out.kids.push_back(std::move(s));
            }
            if (out.kids.empty()) return CNode{is_and ? CNode::Kind::True : CNode::Kind::False, 0, false, {}};
            if (out.kids.size() == 1) return out.kids.front();
            return out;
        }
    }
    return n;
}

void check_consistent(const pddl::Domain& domain, const pddl::Problem& problem) {
    if (problem.domain_name != domain.name) {
        throw pddl::PddlError("problem references domain '" + problem.domain_name + "', not '" + domain.name + "'");
    }
    for (const auto& o : problem.objects) {
        if (!domain.has_type(o.type)) throw pddl::PddlError("object '" + o.name + "' has undeclared type '" + o.type + "'");
    }
    for (const auto& a : problem.init) {
        const auto* decl = domain.find_predicate(a.predicate);
        if (!decl) throw pddl::PddlError("init uses undeclared predicate '" + a.predicate + "'");
        if (decl->params.size() != a.args.size()) throw pddl::PddlError("init atom arity mismatch: " + a.str());
        for (const auto& arg : a.args) {
            if (!problem.object_type(arg)) throw pddl::PddlError("init uses undeclared object '" + arg + "'");
        }
    }
}

struct Node {
    std::uint32_t parent;
    std::uint32_t op;
    std::uint32_t depth;
    std::uint32_t satisfied;
};

}  // namespace

std::string to_string(PlanResult::Status s) {
    switch (s) {
        case PlanResult::Status::Complete: return "complete";
        case PlanResult::Status::Partial: return "partial";
        case PlanResult::Status::Unsolvable: return "unsolvable";
        case PlanResult::Status::BudgetExhausted: return "budget_exhausted";
    }
    return "unknown";
}

PlanResult plan(const pddl::Domain& domain, const pddl::Problem& problem, const PlannerConfig& cfg) {
    if (cfg.time_budget.count() <= 0.0) throw std::invalid_argument("planner time budget must be positive");
    if (cfg.node_budget == 0) throw std::invalid_argument("planner node budget must be positive");
    check_consistent(domain, problem);

    const auto started = std::chrono::steady_clock::now();
    Compiler compiler;
    for (const auto& a : problem.init) compiler.intern(a);

    std::vector<Op> ops;
    for (auto& g : pddl::enumerate_ground_actions(domain, problem)) {
        const auto* schema = domain.find_action(g.name);
        pddl::GroundedAction grounded = pddl::ground(domain, *schema, g.args, problem);
        Op op;
        op.pre = compiler.condition(grounded.precondition);
        compiler.effects(grounded.effect, {}, op.effects);
        op.action = std::move(g);
        ops.push_back(std::move(op));
    }
    pddl::Condition goal = pddl::expand_exists(problem.goal, domain, problem);
    std::vector<CNode> conjuncts;
    for (const auto& c : pddl::goal_conjuncts(goal)) conjuncts.push_back(compiler.condition(c));

    const std::size_t n_atoms = compiler.size();
    const std::size_t words = (n_atoms + 63) / 64 + 1;
    Bits init(words, 0);
    for (const auto& a : problem.init) set(init, compiler.intern(a));

    std::vector<bool> fluent(n_atoms, false);
    for (const auto& op : ops) {
        for (const auto& e : op.effects) {
            for (auto a : e.adds) fluent[a] = true;
            for (auto a : e.dels) fluent[a] = true;
        }
    }
    std::vector<Op> live;
    for (auto& op : ops) {
        op.pre = simplify(op.pre, fluent, init);
        if (op.pre.kind == CNode::Kind::False) continue;
        for (auto& e : op.effects) e.when = simplify(e.when, fluent, init);
        live.push_back(std::move(op));
    }
    ops = std::move(live);  // still sorted by printed form

    auto count_satisfied = [&](const Bits& s) {
        std::uint32_t n = 0;
        for (const auto& c : conjuncts) if (c.eval(s)) ++n;
        return n;
    };
    const auto total = static_cast<std::uint32_t>(conjuncts.size());

    std::vector<Node> nodes;
    std::vector<Bits> states;
    std::unordered_map<Bits, std::uint32_t, BitsHash> seen;
    nodes.push_back(Node{0, 0, 0, count_satisfied(init)});
    states.push_back(init);
    seen.emplace(init, 0);

    auto path_to = [&](std::uint32_t id) {
        std::vector<std::uint32_t> path;
        while (id != 0) {
            path.push_back(nodes[id].op);
            id = nodes[id].parent;
        }
        std::reverse(path.begin(), path.end());
        return path;
    };
    auto to_actions = [&](const std::vector<std::uint32_t>& path) {
        std::vector<pddl::GroundAction> out;
        for (auto o : path) out.push_back(ops[o].action);
        return out;
    };

    std::uint32_t best = 0;
    auto consider = [&](std::uint32_t id) {
        const Node& n = nodes[id];
        const Node& b = nodes[best];
        if (n.satisfied != b.satisfied) {
            if (n.satisfied > b.satisfied) best = id;
            return;
        }
        if (n.depth != b.depth) {
            if (n.depth < b.depth) best = id;
            return;
        }
        if (path_to(id) < path_to(best)) best = id;
    };

    PlanResult result;
    if (nodes[0].satisfied == total) {
        result.status = PlanResult::Status::Complete;
        result.satisfied_goal_conjuncts = total;
        return result;
    }

    // Open list ordered by (unsatisfied conjuncts, insertion order) or FIFO.
    using Entry = std::pair<std::uint32_t, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::deque<std::uint32_t> fifo;
    const bool greedy = cfg.search_mode == SearchMode::GreedyBestFirst;
    if (greedy) heap.emplace(total - nodes[0].satisfied, 0); else fifo.push_back(0);

    bool budget_hit = false;
    std::size_t expanded = 0;
    Bits next(words);
    while (greedy ? !heap.empty() : !fifo.empty()) {
        std::uint32_t id;
        if (greedy) {
            id = heap.top().second;
            heap.pop();
        } else {
            id = fifo.front();
            fifo.pop_front();
        }
        ++expanded;
        if ((expanded & 127u) == 0 &&
            std::chrono::steady_clock::now() - started > cfg.time_budget) {
            budget_hit = true;
            break;
        }
        const Bits current = states[id];
        for (std::uint32_t o = 0; o < ops.size(); ++o) {
            const Op& op = ops[o];
            if (!op.pre.eval(current)) continue;
            next = current;
            for (const auto& e : op.effects) {
                if (!e.when.eval(current)) continue;
                for (auto a : e.dels) reset(next, a);
            }
            for (const auto& e : op.effects) {
                if (!e.when.eval(current)) continue;
                for (auto a : e.adds) set(next, a);
            }
            if (seen.count(next)) continue;
            auto child = static_cast<std::uint32_t>(nodes.size());
            nodes.push_back(Node{id, o, nodes[id].depth + 1, count_satisfied(next)});
            states.push_back(next);
            seen.emplace(next, child);
            consider(child);
            if (nodes[child].satisfied == total) {
                result.status = PlanResult::Status::Complete;
                result.plan = to_actions(path_to(child));
                result.satisfied_goal_conjuncts = total;
                result.expanded_nodes = expanded;
                return result;
            }
            if (greedy) heap.emplace(total - nodes[child].satisfied, child); else fifo.push_back(child);
            if (nodes.size() >= cfg.node_budget) {
                budget_hit = true;
                break;
            }
        }
        if (budget_hit) break;
    }

    result.expanded_nodes = expanded;
    result.plan = to_actions(path_to(best));
    result.satisfied_goal_conjuncts = nodes[best].satisfied;
    if (budget_hit) {
        result.status = PlanResult::Status::BudgetExhausted;
    } else if (best == 0) {
        result.status = PlanResult::Status::Unsolvable;
    } else {
        result.status = PlanResult::Status::Partial;
    }
    return result;
}

}  // namespace induct::planner

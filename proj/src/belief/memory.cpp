#include "induct/belief.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <iterator>
#include <optional>
#include <memory>
#include <set>
#include <sstream>

namespace induct::belief {

using pddl::Condition;

std::string to_string(Kind k) { return k == Kind::Pre ? "pre" : "post"; }

void BeliefConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw BeliefError("alpha must lie in [0,1]");
    if (!(beta >= 0.0 && beta < 1.0)) throw BeliefError("beta must lie in [0,1)");
}

std::string Step::token() const {
    std::string base;
    switch (type) {
    case Type::And: base = "and"; break;
    case Type::Or: base = "or"; break;
    case Type::When: return "when" + pddl::print_condition(antecedent);
    case Type::Exists: {
        base = "exists";
        if (ordinal > 1) base += std::to_string(ordinal);
        std::string vars;
        for (const auto& v : variables) {
            if (!vars.empty()) vars += ' ';
            vars += v.name + " - " + v.type;
        }
        return base + "(" + vars + ")";
    }
    }
    if (ordinal > 1) base += std::to_string(ordinal);
    return base;
}

ProposedSemantics ProposedSemantics::from_domain(const pddl::Domain& d) {
    ProposedSemantics s;
    for (const auto& a : d.actions) s.actions[a.name] = ActionSemantics{a.precondition, a.effect};
    return s;
}

pddl::Literal negate(const pddl::Literal& l) { return pddl::Literal{l.atom, !l.negated}; }

double update_belief(double prior, bool in, bool neg_in, const BeliefConfig& cfg) {
    const double i = in ? 1.0 : 0.0;
    const double n = neg_in ? 1.0 : 0.0;
    double p = prior == 0.0 ? i - cfg.alpha * n
                            : cfg.beta * prior + (1.0 - cfg.beta) * i - cfg.alpha * (1.0 - cfg.beta) * n;
    return std::clamp(p, 0.0, 1.0);
}

namespace {

std::string chain_prefix(const std::string& action, Kind kind, const std::vector<Step>& chain) {
    std::string key = action + "_" + to_string(kind);
    for (const auto& s : chain) key += "-" + s.token();
    return key + "-";
}

void finish(Statement& s) {
    std::string prefix = chain_prefix(s.action, s.kind, s.chain);
    s.path_key = prefix + s.literal.str();
    s.negation_key = prefix + negate(s.literal).str();
}

struct Collector {
    std::string action;
    Kind kind;
    std::vector<Statement> out;

    // children of the connector node whose full chain is `chain`
    void collect(const std::vector<Condition>& children, std::vector<Step>& chain, std::map<Step::Type, int>& counts) {
        const Step::Type here = chain.back().type;
        for (const auto& c : children) {
            switch (c.kind) {
            case Condition::Kind::Literal: {
                Statement s;
                s.action = action;
                s.kind = kind;
                s.chain = chain;
                s.literal = c.literal;
                finish(s);
                out.push_back(std::move(s));
                break;
            }
            case Condition::Kind::And:
                if (here == Step::Type::And || here == Step::Type::When) {
                    collect(c.children, chain, counts);
                } else {
                    descend(Step{Step::Type::And, ++counts[Step::Type::And], {}, {}}, c.children, chain);
                }
                break;
            case Condition::Kind::Or:
                descend(Step{Step::Type::Or, ++counts[Step::Type::Or], {}, {}}, c.children, chain);
                break;
            case Condition::Kind::When: {
                const Condition& consequent = c.children.at(1);
                std::vector<Condition> body = consequent.kind == Condition::Kind::And ? consequent.children
                                                                                      : std::vector<Condition>{consequent};
                descend(Step{Step::Type::When, 1, c.children.at(0), {}}, body, chain);
                break;
            }
            case Condition::Kind::Exists:
                descend(Step{Step::Type::Exists, ++counts[Step::Type::Exists], {}, c.variables}, c.children, chain);
                break;
            }
        }
    }

    void descend(Step step, const std::vector<Condition>& children, std::vector<Step>& chain) {
        chain.push_back(std::move(step));
        std::map<Step::Type, int> counts;
        collect(children, chain, counts);
        chain.pop_back();
    }
};

// Trie over connector tokens, remembering the interleaving of literals and sub-connectors.
struct Node {
    Step step;
    std::vector<std::pair<bool, std::size_t>> items;  // (is_child, index)
    std::vector<pddl::Literal> literals;
    std::vector<std::unique_ptr<Node>> children;
    std::map<std::string, std::size_t> by_token;

    Node* child(const Step& s) {
        auto token = s.token();
        auto it = by_token.find(token);
        if (it != by_token.end()) return children[it->second].get();
        children.push_back(std::make_unique<Node>());
        children.back()->step = s;
        by_token[token] = children.size() - 1;
        items.emplace_back(true, children.size() - 1);
        return children.back().get();
    }

    std::optional<Condition> build(bool root) const {
        std::vector<Condition> parts;
        for (auto [is_child, idx] : items) {
            if (!is_child) {
                parts.push_back(Condition::lit(literals[idx].atom, literals[idx].negated));
            } else if (auto sub = children[idx]->build(false)) {
                parts.push_back(std::move(*sub));
            }
        }
        if (parts.empty() && !root) return std::nullopt;
        switch (step.type) {
        case Step::Type::And: return Condition::conj(std::move(parts));
        case Step::Type::Or: return Condition::disj(std::move(parts));
        case Step::Type::When: return Condition::when(step.antecedent, Condition::conj(std::move(parts)));
        case Step::Type::Exists:
            return Condition::exists(step.variables, parts.size() == 1 ? std::move(parts[0]) : Condition::conj(std::move(parts)));
        }
        return std::nullopt;
    }
};

}  // namespace

std::vector<Statement> decompose(const std::string& action, Kind kind, const Condition& root) {
    Collector c{action, kind, {}};
    std::vector<Step> chain{Step{}};
    std::map<Step::Type, int> counts;
    if (root.kind == Condition::Kind::And) c.collect(root.children, chain, counts);
    else c.collect({root}, chain, counts);
    // identical leaves collapse to one path
    std::vector<Statement> unique;
    std::set<std::string> seen;
    for (auto& s : c.out)
        if (seen.insert(s.path_key).second) unique.push_back(std::move(s));
    return unique;
}

std::vector<std::string> enumerate_paths(const std::string& action, Kind kind, const Condition& root) {
    std::vector<std::string> keys;
    for (const auto& s : decompose(action, kind, root)) keys.push_back(s.path_key);
    return keys;
}

std::vector<std::string> enumerate_paths(const ProposedSemantics& sem) {
    std::vector<std::string> keys;
    for (const auto& [name, s] : sem.actions) {
        for (auto& k : enumerate_paths(name, Kind::Pre, s.precondition)) keys.push_back(std::move(k));
        for (auto& k : enumerate_paths(name, Kind::Post, s.effect)) keys.push_back(std::move(k));
    }
    return keys;
}

std::vector<std::string> enumerate_paths(const pddl::Domain& d) {
    std::vector<std::string> keys;
    for (const auto& a : d.actions) {
        for (auto& k : enumerate_paths(a.name, Kind::Pre, a.precondition)) keys.push_back(std::move(k));
        for (auto& k : enumerate_paths(a.name, Kind::Post, a.effect)) keys.push_back(std::move(k));
    }
    return keys;
}

Condition assemble(const std::vector<const Statement*>& leaves) {
    Node root;
    for (const Statement* s : leaves) {
        Node* n = &root;
        for (std::size_t i = 1; i < s->chain.size(); ++i) n = n->child(s->chain[i]);
        n->literals.push_back(s->literal);
        n->items.emplace_back(false, n->literals.size() - 1);
    }
    return *root.build(true);
}

const Statement* Memory::find(const std::string& path_key) const {
    auto it = index_.find(path_key);
    return it == index_.end() ? nullptr : &leaves_[it->second];
}

double Memory::belief(const std::string& path_key) const {
    const Statement* s = find(path_key);
    return s ? s->belief : 0.0;
}

void Memory::insert(Statement s) {
    index_[s.path_key] = leaves_.size();
    leaves_.push_back(std::move(s));
}

void Memory::set_belief(const std::string& path_key, double p) {
    auto it = index_.find(path_key);
    if (it == index_.end()) throw BeliefError("no statement '" + path_key + "'");
    if (!(p >= 0.0 && p <= 1.0)) throw BeliefError("belief must lie in [0,1]");
    leaves_[it->second].belief = p;
}

Memory Memory::update(const ProposedSemantics& proposed, const BeliefConfig& cfg) const {
    cfg.validate();
    std::set<std::string> predicted;
    Memory next = *this;
    for (const auto& [name, sem] : proposed.actions) {
        for (Kind kind : {Kind::Pre, Kind::Post}) {
            for (auto& s : decompose(name, kind, kind == Kind::Pre ? sem.precondition : sem.effect)) {
                if (kind == Kind::Post) {
                    for (const auto& step : s.chain)
                        if (step.type == Step::Type::Or || step.type == Step::Type::Exists)
                            throw BeliefError("effect of '" + name + "' contains or/exists");
                } else {
                    for (const auto& step : s.chain)
                        if (step.type == Step::Type::When) throw BeliefError("precondition of '" + name + "' contains when");
                }
                predicted.insert(s.path_key);
                if (!next.find(s.path_key)) {
                    s.belief = 0.0;
                    next.insert(std::move(s));
                }
            }
        }
    }
    for (auto& leaf : next.leaves_)
        leaf.belief = update_belief(leaf.belief, predicted.count(leaf.path_key) != 0,
                                    predicted.count(leaf.negation_key) != 0, cfg);
    return next;
}

namespace {

pddl::Domain build_domain(const pddl::Domain& skeleton, const std::vector<Statement>& leaves,
                          const std::vector<bool>& included) {
    pddl::Domain d = pddl::strip_semantics(skeleton);
    for (auto& a : d.actions) {
        std::vector<const Statement*> pre, post;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (!included[i] || leaves[i].action != a.name) continue;
            (leaves[i].kind == Kind::Pre ? pre : post).push_back(&leaves[i]);
        }
        a.precondition = assemble(pre);
        a.effect = assemble(post);
    }
    return d;
}

}  // namespace

pddl::Domain Memory::sample(const pddl::Domain& skeleton, std::mt19937_64& rng) const {
    std::vector<bool> included(leaves_.size());
    for (std::size_t i = 0; i < leaves_.size(); ++i) included[i] = uniform01(rng) < leaves_[i].belief;
    return build_domain(skeleton, leaves_, included);
}

pddl::Domain Memory::threshold_domain(const pddl::Domain& skeleton, double threshold) const {
    std::vector<bool> included(leaves_.size());
    for (std::size_t i = 0; i < leaves_.size(); ++i) included[i] = leaves_[i].belief >= threshold;
    return build_domain(skeleton, leaves_, included);
}

std::vector<std::string> Memory::paths_at_threshold(double threshold) const {
    std::vector<std::string> keys;
    for (const auto& s : leaves_)
        if (s.belief >= threshold) keys.push_back(s.path_key);
    return keys;
}

std::vector<std::string> Memory::paths() const {
    std::vector<std::string> keys;
    for (const auto& s : leaves_) keys.push_back(s.path_key);
    return keys;
}

std::string Memory::serialize() const {
    std::ostringstream out;
    char buf[32];
    for (const auto& s : leaves_) {
        std::snprintf(buf, sizeof buf, "%.17g", s.belief);
        out << s.action << '\t' << to_string(s.kind) << '\t' << s.path_key << '\t' << buf << '\n';
    }
    return out.str();
}

namespace {

std::vector<pddl::TypedName> parse_typed_vars(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> words{std::istream_iterator<std::string>(in), {}};
    std::vector<pddl::TypedName> vars;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] == "-" && i + 1 < words.size() && !vars.empty()) {
            vars.back().type = words[++i];
            continue;
        }
        vars.push_back(pddl::TypedName{words[i], "object"});
    }
    return vars;
}

// "(...)" starting at pos; returns the index one past the closing paren
std::size_t balanced_end(const std::string& s, std::size_t pos) {
    int depth = 0;
    for (std::size_t i = pos; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')' && --depth == 0) return i + 1;
    }
    throw BeliefError("unbalanced parentheses in '" + s + "'");
}

Statement parse_record(const std::string& action, Kind kind, const std::string& key, const pddl::Domain& skeleton) {
    const pddl::ActionSchema* schema = skeleton.find_action(action);
    if (!schema) throw BeliefError("unknown action '" + action + "'");
    const std::string prefix = action + "_" + to_string(kind) + "-";
    if (key.rfind(prefix, 0) != 0) throw BeliefError("path '" + key + "' does not match its action");
    std::vector<pddl::TypedName> scope = schema->params;
    Statement s;
    s.action = action;
    s.kind = kind;
    std::size_t pos = prefix.size();
    while (pos < key.size() && key[pos] != '(') {
        std::size_t word_end = pos;
        while (word_end < key.size() && std::isalpha(static_cast<unsigned char>(key[word_end]))) ++word_end;
        std::string word = key.substr(pos, word_end - pos);
        std::size_t digits_end = word_end;
        while (digits_end < key.size() && std::isdigit(static_cast<unsigned char>(key[digits_end]))) ++digits_end;
        Step step;
        if (digits_end > word_end) step.ordinal = std::stoi(key.substr(word_end, digits_end - word_end));
        pos = digits_end;
        if (word == "and") step.type = Step::Type::And;
        else if (word == "or") step.type = Step::Type::Or;
        else if (word == "when" || word == "exists") {
            std::size_t end = balanced_end(key, pos);
            std::string inner = key.substr(pos, end - pos);
            pos = end;
            if (word == "when") {
                step.type = Step::Type::When;
                step.antecedent = pddl::parse_condition(inner, skeleton, scope, pddl::ConditionRole::Precondition);
            } else {
                step.type = Step::Type::Exists;
                step.variables = parse_typed_vars(inner.substr(1, inner.size() - 2));
                scope.insert(scope.end(), step.variables.begin(), step.variables.end());
            }
        } else {
            throw BeliefError("unknown connector '" + word + "' in '" + key + "'");
        }
        if (pos >= key.size() || key[pos] != '-') throw BeliefError("malformed path '" + key + "'");
        ++pos;
        s.chain.push_back(std::move(step));
    }
    if (s.chain.empty() || s.chain.front().type != Step::Type::And) throw BeliefError("path '" + key + "' lacks its root");
    Condition lit = pddl::parse_condition(key.substr(pos), skeleton, scope, pddl::ConditionRole::Precondition);
    if (lit.kind != Condition::Kind::Literal) throw BeliefError("path '" + key + "' does not end in a literal");
    s.literal = lit.literal;
    finish(s);
    if (s.path_key != key) throw BeliefError("path '" + key + "' is not canonical");
    return s;
}

}  // namespace

Memory Memory::deserialize(const std::string& text, const pddl::Domain& skeleton) {
    Memory m;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t tab = line.find('\t'); tab != std::string::npos; tab = line.find('\t', start)) {
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        fields.push_back(line.substr(start));
        if (fields.size() != 4) throw BeliefError("line " + std::to_string(lineno) + ": expected 4 fields");
        Kind kind;
        if (fields[1] == "pre") kind = Kind::Pre;
        else if (fields[1] == "post") kind = Kind::Post;
        else throw BeliefError("line " + std::to_string(lineno) + ": bad kind '" + fields[1] + "'");
        Statement s;
        try {
            s = parse_record(fields[0], kind, fields[2], skeleton);
        } catch (const pddl::PddlError& e) {
            throw BeliefError("line " + std::to_string(lineno) + ": " + e.what());
        }
        s.belief = std::stod(fields[3]);
        if (!(s.belief >= 0.0 && s.belief <= 1.0)) throw BeliefError("line " + std::to_string(lineno) + ": belief out of range");
        if (m.find(s.path_key)) throw BeliefError("line " + std::to_string(lineno) + ": duplicate path");
        m.insert(std::move(s));
    }
    return m;
}

}  // namespace induct::belief

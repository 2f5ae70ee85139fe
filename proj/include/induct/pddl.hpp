#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace induct::pddl {

class PddlError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or validation error raised by the parser. Positions are 1-based.
class ParseError : public PddlError {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Lowercases an identifier. All names stored in the model are canonical.
std::string canonical(std::string_view name);

inline bool is_variable(std::string_view term) { return !term.empty() && term.front() == '?'; }

struct TypedName {
    std::string name;
    std::string type = "object";

    auto operator<=>(const TypedName&) const = default;
};

/// Predicate applied to terms. A term starting with '?' is a variable, anything else a constant.
struct Atom {
    std::string predicate;
    std::vector<std::string> args;

    auto operator<=>(const Atom&) const = default;

    bool is_ground() const;
    std::string str() const;
};

struct Literal {
    Atom atom;
    bool negated = false;

    auto operator<=>(const Literal&) const = default;

    std::string str() const;
};

struct Condition {
    enum class Kind { Literal, And, Or, When, Exists };

    Kind kind = Kind::And;
    Literal literal;                  // Kind::Literal
    std::vector<Condition> children;  // And/Or children; When: {antecedent, consequent}; Exists: {body}
    std::vector<TypedName> variables; // Kind::Exists

    bool operator==(const Condition&) const = default;

    static Condition lit(Atom atom, bool negated = false);
    static Condition conj(std::vector<Condition> children = {});
    static Condition disj(std::vector<Condition> children);
    static Condition when(Condition antecedent, Condition consequent);
    static Condition exists(std::vector<TypedName> variables, Condition body);

    bool is_empty_and() const { return kind == Kind::And && children.empty(); }
    std::string str() const;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> params;
    Condition precondition;
    Condition effect;

    bool operator==(const ActionSchema&) const = default;
};

struct PredicateDecl {
    std::string name;
    std::vector<TypedName> params;

    bool operator==(const PredicateDecl&) const = default;
};

struct Domain {
    std::string name;
    std::vector<std::string> requirements;
    /// (type, parent) in declaration order; "object" is implicit.
    std::vector<std::pair<std::string, std::string>> types;
    std::vector<PredicateDecl> predicates;
    std::vector<ActionSchema> actions;

    bool operator==(const Domain&) const = default;

    const ActionSchema* find_action(std::string_view name) const;
    const PredicateDecl* find_predicate(std::string_view name) const;
    bool has_type(std::string_view type) const;
    /// True if `type` equals `ancestor` or inherits from it.
    bool is_subtype(std::string_view type, std::string_view ancestor) const;
};

/// Closed-world set of ground atoms.
struct State {
    std::set<Atom> atoms;

    bool operator==(const State&) const = default;

    bool contains(const Atom& a) const { return atoms.count(a) != 0; }
};

struct Problem {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;
    std::set<Atom> init;
    Condition goal;

    bool operator==(const Problem&) const = default;

    std::optional<std::string> object_type(std::string_view object) const;
    std::vector<std::string> objects_of_type(const Domain& domain, std::string_view type) const;
    State initial_state() const { return State{init}; }
};

struct GroundAction {
    std::string name;
    std::vector<std::string> args;

    auto operator<=>(const GroundAction&) const = default;

    std::string str() const;
};

struct GroundedAction {
    Condition precondition;
    Condition effect;
};

// Parsing. Both parsers reject requirements outside the supported fragment.
Domain parse_domain(std::string_view text);
Problem parse_problem(std::string_view text, const Domain& domain);

/// Parses a precondition/goal/effect tree. `scope` lists the variables that may
/// appear free; objects (if non-empty) restricts constants to declared objects.
enum class ConditionRole { Precondition, Effect, Goal };
Condition parse_condition(std::string_view text, const Domain& domain,
                          std::span<const TypedName> scope, ConditionRole role,
                          const Problem* problem = nullptr);

/// Parses "(name arg ...)" into a ground action; no schema checks.
GroundAction parse_ground_action(std::string_view text);
/// Parses a ground atom "(pred arg ...)" and checks it against the domain/problem.
Atom parse_ground_atom(std::string_view text, const Domain& domain, const Problem* problem);

/// Parses one "(:action ...)" block against the domain's predicates.
ActionSchema parse_action(std::string_view text, const Domain& domain);

std::string print_condition(const Condition& c);
std::string print_action(const ActionSchema& a);
std::string print_domain(const Domain& d);
std::string print_problem(const Problem& p);

/// Domain with identical signatures and empty (and ) semantics.
Domain strip_semantics(const Domain& d);

// Execution semantics.
void check_ground_action(const GroundAction& action, const Domain& domain, const Problem& problem);
GroundedAction ground(const Domain& domain, const ActionSchema& schema,
                      std::span<const std::string> args, const Problem& problem);
Condition substitute(const Condition& c, const std::map<std::string, std::string>& binding);
Condition expand_exists(const Condition& c, const Domain& domain, const Problem& problem);

bool holds(const State& state, const Condition& cond);
State apply(const State& state, const Condition& effect);
bool applicable(const State& state, const GroundAction& action, const Domain& domain,
                const Problem& problem);
/// Applies `action` if applicable, otherwise returns std::nullopt.
std::optional<State> successor(const State& state, const GroundAction& action, const Domain& domain,
                               const Problem& problem);

/// Top-level conjuncts of a goal (the goal itself when it is not an And).
std::vector<Condition> goal_conjuncts(const Condition& goal);
std::size_t satisfied_conjuncts(const State& state, const Condition& goal);

/// Every type-conformant ground action of the domain over the problem's objects,
/// sorted by printed form.
std::vector<GroundAction> enumerate_ground_actions(const Domain& domain, const Problem& problem);

}  // namespace induct::pddl

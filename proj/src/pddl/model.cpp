#include "induct/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace induct::pddl {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : PddlError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::string canonical(std::string_view name) {
    std::string out(name);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool Atom::is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const std::string& a) { return is_variable(a); });
}

std::string Atom::str() const {
    std::string out = "(" + predicate;
    for (const auto& a : args) out += " " + a;
    out += ")";
    return out;
}

std::string Literal::str() const {
    return negated ? "(not " + atom.str() + ")" : atom.str();
}

Condition Condition::lit(Atom atom, bool negated) {
    Condition c;
    c.kind = Kind::Literal;
    c.literal = Literal{std::move(atom), negated};
    return c;
}

Condition Condition::conj(std::vector<Condition> children) {
    Condition c;
    c.kind = Kind::And;
    c.children = std::move(children);
    return c;
}

Condition Condition::disj(std::vector<Condition> children) {
    Condition c;
    c.kind = Kind::Or;
    c.children = std::move(children);
    return c;
}

Condition Condition::when(Condition antecedent, Condition consequent) {
    Condition c;
    c.kind = Kind::When;
    c.children.push_back(std::move(antecedent));
    c.children.push_back(std::move(consequent));
    return c;
}

Condition Condition::exists(std::vector<TypedName> variables, Condition body) {
    Condition c;
    c.kind = Kind::Exists;
    c.variables = std::move(variables);
    c.children.push_back(std::move(body));
    return c;
}

std::string Condition::str() const { return print_condition(*this); }

const ActionSchema* Domain::find_action(std::string_view name) const {
    for (const auto& a : actions) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

const PredicateDecl* Domain::find_predicate(std::string_view name) const {
    for (const auto& p : predicates) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

bool Domain::has_type(std::string_view type) const {
    if (type == "object") return true;
    return std::any_of(types.begin(), types.end(), [&](const auto& t) { return t.first == type; });
}

bool Domain::is_subtype(std::string_view type, std::string_view ancestor) const {
    if (ancestor == "object" || type == ancestor) return true;
    std::string current(type);
    // Bounded walk; the hierarchy is a forest so this terminates well within the bound.
    for (std::size_t hops = 0; hops <= types.size(); ++hops) {
        auto it = std::find_if(types.begin(), types.end(), [&](const auto& t) { return t.first == current; });
        if (it == types.end()) return false;
        if (it->second == ancestor) return true;
        if (it->second == "object") return false;
        current = it->second;
    }
    return false;
}

std::optional<std::string> Problem::object_type(std::string_view object) const {
    for (const auto& o : objects) {
        if (o.name == object) return o.type;
    }
    return std::nullopt;
}

std::vector<std::string> Problem::objects_of_type(const Domain& domain, std::string_view type) const {
    std::vector<std::string> out;
    for (const auto& o : objects) {
        if (domain.is_subtype(o.type, type)) out.push_back(o.name);
    }
    return out;
}

std::string GroundAction::str() const {
    std::string out = "(" + name;
    for (const auto& a : args) out += " " + a;
    out += ")";
    return out;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

std::string typed_list(const std::vector<TypedName>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += " ";
        out += names[i].name + " - " + names[i].type;
    }
    return out;
}

}  // namespace

std::string print_condition(const Condition& c) {
    switch (c.kind) {
        case Condition::Kind::Literal:
            return c.literal.str();
        case Condition::Kind::And:
        case Condition::Kind::Or: {
            std::string out = c.kind == Condition::Kind::And ? "(and " : "(or ";
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                if (i) out += " ";
                out += print_condition(c.children[i]);
            }
            return out + ")";
        }
        case Condition::Kind::When:
            return "(when " + print_condition(c.children.at(0)) + " " + print_condition(c.children.at(1)) + ")";
        case Condition::Kind::Exists:
            return "(exists (" + typed_list(c.variables) + ") " + print_condition(c.children.at(0)) + ")";
    }
    return {};
}

std::string print_action(const ActionSchema& a) {
    std::ostringstream out;
    out << "(:action " << a.name << "\n";
    out << "    :parameters (" << typed_list(a.params) << ")\n";
    out << "    :precondition " << print_condition(a.precondition) << "\n";
    out << "    :effect " << print_condition(a.effect) << ")";
    return out.str();
}

std::string print_domain(const Domain& d) {
    std::ostringstream out;
    out << "(define (domain " << d.name << ")\n";
    if (!d.requirements.empty()) {
        out << "  (:requirements";
        for (const auto& r : d.requirements) out << " " << r;
        out << ")\n";
    }
    if (!d.types.empty()) {
        out << "  (:types";
        for (const auto& [child, parent] : d.types) out << " " << child << " - " << parent;
        out << ")\n";
    }
    out << "  (:predicates";
    for (const auto& p : d.predicates) {
        out << "\n    (" << p.name;
        if (!p.params.empty()) out << " " << typed_list(p.params);
        out << ")";
    }
    out << ")\n";
    for (const auto& a : d.actions) {
        std::string text = print_action(a);
        // indent every line by two spaces
        out << "  ";
        for (char ch : text) {
            out << ch;
            if (ch == '\n') out << "  ";
        }
        out << "\n";
    }
    out << ")\n";
    return out.str();
}

std::string print_problem(const Problem& p) {
    std::ostringstream out;
    out << "(define (problem " << p.name << ")\n";
    out << "  (:domain " << p.domain_name << ")\n";
    if (!p.objects.empty()) {
        out << "  (:objects";
        for (const auto& o : p.objects) out << " " << o.name << " - " << o.type;
        out << ")\n";
    }
    if (!p.init.empty()) {
        out << "  (:init";
        for (const auto& a : p.init) out << "\n    " << a.str();
        out << ")\n";
    }
    out << "  (:goal " << print_condition(p.goal) << "))\n";
    return out.str();
}

Domain strip_semantics(const Domain& d) {
    Domain out = d;
    for (auto& a : out.actions) {
        a.precondition = Condition::conj();
        a.effect = Condition::conj();
    }
    return out;
}

}  // namespace induct::pddl

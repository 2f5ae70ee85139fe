#include "induct/pddl.hpp"

#include "sexpr.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace induct::pddl {

using detail::fail;
using detail::SExpr;

namespace {

constexpr std::array kSupportedRequirements = {
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":conditional-effects",
    ":existential-preconditions",
};

const std::string& expect_atom(const SExpr& e, const char* what) {
    if (!e.is_atom) fail(e, std::string("expected ") + what);
    return e.atom;
}

void check_identifier(const SExpr& e, const char* what) {
    const std::string& s = expect_atom(e, what);
    if (s.empty() || s.front() == ':' || s.front() == '?' || s == "-") {
        fail(e, std::string("invalid ") + what + " '" + s + "'");
    }
}

// "a b - t c" -> a:t b:t c:object
std::vector<TypedName> parse_typed_list(const SExpr& list, std::size_t start, bool variables) {
    std::vector<TypedName> out;
    std::vector<std::size_t> pending;
    for (std::size_t i = start; i < list.items.size(); ++i) {
        const SExpr& item = list.items[i];
        if (item.is_list()) fail(item, "nested list in typed list (either-types are not supported)");
        if (item.atom == "-") {
            if (i + 1 >= list.items.size()) fail(item, "missing type after '-'");
            const SExpr& type = list.items[i + 1];
            if (type.is_list()) fail(type, "either-types are not supported");
            check_identifier(type, "type name");
            if (pending.empty()) fail(item, "type annotation without names");
            for (std::size_t idx : pending) out[idx].type = type.atom;
            pending.clear();
            ++i;
            continue;
        }
        if (variables != is_variable(item.atom)) {
            fail(item, variables ? "expected a variable starting with '?'" : "unexpected variable");
        }
        if (!variables) check_identifier(item, "name");
        if (variables && item.atom.size() < 2) fail(item, "empty variable name");
        pending.push_back(out.size());
        out.push_back(TypedName{item.atom, "object"});
    }
    return out;
}

class ConditionParser {
public:
    ConditionParser(const Domain& domain, const Problem* problem) : domain_(domain), problem_(problem) {}

    Condition parse(const SExpr& e, std::vector<TypedName>& scope, ConditionRole role, bool in_when = false) {
        if (e.is_atom) fail(e, "expected a condition, got '" + e.atom + "'");
        if (e.items.empty()) fail(e, "empty condition");
        if (!e.items.front().is_atom) fail(e, "condition must start with a keyword or predicate");
        const std::string& head = e.items.front().atom;

        if (head == "and") {
            std::vector<Condition> children;
            for (std::size_t i = 1; i < e.items.size(); ++i) children.push_back(parse(e.items[i], scope, role, in_when));
            return Condition::conj(std::move(children));
        }
        if (head == "or") {
            if (role == ConditionRole::Effect) fail(e, "'or' is not allowed in effects");
            if (e.items.size() < 2) fail(e, "'or' needs at least one disjunct");
            std::vector<Condition> children;
            for (std::size_t i = 1; i < e.items.size(); ++i) children.push_back(parse(e.items[i], scope, role, in_when));
            return Condition::disj(std::move(children));
        }
        if (head == "not") {
            if (e.items.size() != 2) fail(e, "'not' takes exactly one argument");
            const SExpr& inner = e.items[1];
            if (inner.is_atom || inner.items.empty() || !inner.items.front().is_atom) fail(inner, "'not' expects an atom");
            const std::string& h = inner.items.front().atom;
            if (h == "and" || h == "or" || h == "not" || h == "when" || h == "exists" || h == "forall") {
                fail(inner, "'not' is only supported over atoms");
            }
            return Condition::lit(parse_atom(inner, scope), true);
        }
        if (head == "when") {
            if (role != ConditionRole::Effect) fail(e, "'when' is only allowed in effects");
            if (in_when) fail(e, "nested 'when' is not supported");
            if (e.items.size() != 3) fail(e, "'when' takes an antecedent and a consequent");
            Condition ante = parse(e.items[1], scope, ConditionRole::Precondition);
            Condition cons = parse(e.items[2], scope, ConditionRole::Effect, true);
            return Condition::when(std::move(ante), std::move(cons));
        }
        if (head == "exists") {
            if (role == ConditionRole::Effect) fail(e, "'exists' is not allowed in effects");
            if (e.items.size() != 3 || e.items[1].is_atom) fail(e, "'exists' takes a variable list and a body");
            std::vector<TypedName> vars = parse_typed_list(e.items[1], 0, true);
            for (const auto& v : vars) {
                if (!domain_.has_type(v.type)) fail(e.items[1], "unknown type '" + v.type + "'");
            }
            std::size_t mark = scope.size();
            scope.insert(scope.end(), vars.begin(), vars.end());
            Condition body = parse(e.items[2], scope, role, in_when);
            scope.resize(mark);
            return Condition::exists(std::move(vars), std::move(body));
        }
        if (head == "forall" || head == "imply" || head == "=" || head == "increase" || head == "decrease") {
            fail(e, "'" + head + "' is outside the supported PDDL fragment");
        }
        return Condition::lit(parse_atom(e, scope), false);
    }

    Atom parse_atom(const SExpr& e, const std::vector<TypedName>& scope) {
        const std::string& pred = expect_atom(e.items.front(), "predicate name");
        const PredicateDecl* decl = domain_.find_predicate(pred);
        if (!decl) fail(e.items.front(), "unknown predicate '" + pred + "'");
        if (decl->params.size() + 1 != e.items.size()) {
            fail(e, "arity mismatch for '" + pred + "': expected " + std::to_string(decl->params.size()) +
                        ", got " + std::to_string(e.items.size() - 1));
        }
        Atom atom{pred, {}};
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const SExpr& arg = e.items[i];
            const std::string& name = expect_atom(arg, "term");
            const std::string& expected = decl->params[i - 1].type;
            std::string actual;
            if (is_variable(name)) {
                auto it = std::find_if(scope.rbegin(), scope.rend(), [&](const TypedName& v) { return v.name == name; });
                if (it == scope.rend()) fail(arg, "unbound variable '" + name + "'");
                actual = it->type;
                // Variables may be narrower or wider than the declared parameter type.
                if (!domain_.is_subtype(actual, expected) && !domain_.is_subtype(expected, actual)) {
                    fail(arg, "type mismatch: '" + name + "' is " + actual + ", expected " + expected);
                }
            } else {
                if (!problem_) fail(arg, "unknown constant '" + name + "'");
                auto type = problem_->object_type(name);
                if (!type) fail(arg, "unknown object '" + name + "'");
                if (!domain_.is_subtype(*type, expected)) {
                    fail(arg, "type mismatch: '" + name + "' is " + *type + ", expected " + expected);
                }
            }
            atom.args.push_back(name);
        }
        return atom;
    }

private:
    const Domain& domain_;
    const Problem* problem_;
};

void parse_requirements(const SExpr& section, std::vector<std::string>& out) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
        const std::string& r = expect_atom(section.items[i], "requirement");
        if (std::find(kSupportedRequirements.begin(), kSupportedRequirements.end(), r) == kSupportedRequirements.end()) {
            fail(section.items[i], "unsupported requirement '" + r + "'");
        }
        out.push_back(r);
    }
}

void parse_types(const SExpr& section, Domain& d) {
    std::vector<TypedName> types = parse_typed_list(section, 1, false);
    for (const auto& t : types) {
        if (t.name == "object") continue;
        if (d.has_type(t.name)) fail(section, "duplicate type '" + t.name + "'");
        d.types.emplace_back(t.name, t.type);
    }
    for (const auto& [child, parent] : d.types) {
        if (!d.has_type(parent)) fail(section, "unknown type '" + parent + "'");
    }
    // reject cycles
    for (const auto& [child, parent] : d.types) {
        std::string cur = parent;
        for (std::size_t hops = 0; cur != "object"; ++hops) {
            if (cur == child || hops > d.types.size()) fail(section, "cyclic type hierarchy at '" + child + "'");
            auto it = std::find_if(d.types.begin(), d.types.end(), [&](const auto& t) { return t.first == cur; });
            cur = it->second;
        }
    }
}

void parse_predicates(const SExpr& section, Domain& d) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
        const SExpr& p = section.items[i];
        if (p.is_atom || p.items.empty()) fail(p, "expected a predicate declaration");
        check_identifier(p.items.front(), "predicate name");
        PredicateDecl decl{p.items.front().atom, parse_typed_list(p, 1, true)};
        if (d.find_predicate(decl.name)) fail(p, "duplicate predicate '" + decl.name + "'");
        for (const auto& param : decl.params) {
            if (!d.has_type(param.type)) fail(p, "unknown type '" + param.type + "'");
        }
        d.predicates.push_back(std::move(decl));
    }
}

ActionSchema parse_action_expr(const SExpr& e, const Domain& d) {
    if (!e.head_is(":action") || e.items.size() < 2) fail(e, "expected (:action name ...)");
    check_identifier(e.items[1], "action name");
    ActionSchema a;
    a.name = e.items[1].atom;
    a.precondition = Condition::conj();
    a.effect = Condition::conj();
    ConditionParser cp(d, nullptr);
    bool seen_params = false, seen_pre = false, seen_eff = false;
    for (std::size_t i = 2; i < e.items.size(); i += 2) {
        const std::string& key = expect_atom(e.items[i], "action keyword");
        if (i + 1 >= e.items.size()) fail(e.items[i], "missing value for '" + key + "'");
        const SExpr& value = e.items[i + 1];
        if (key == ":parameters") {
            if (seen_params) fail(e.items[i], "duplicate :parameters");
            if (value.is_atom) fail(value, "expected a parameter list");
            a.params = parse_typed_list(value, 0, true);
            for (std::size_t x = 0; x < a.params.size(); ++x) {
                if (!d.has_type(a.params[x].type)) fail(value, "unknown type '" + a.params[x].type + "'");
                for (std::size_t y = 0; y < x; ++y) {
                    if (a.params[x].name == a.params[y].name) fail(value, "duplicate parameter '" + a.params[x].name + "'");
                }
            }
            seen_params = true;
        } else if (key == ":precondition") {
            if (seen_pre) fail(e.items[i], "duplicate :precondition");
            std::vector<TypedName> scope = a.params;
            a.precondition = cp.parse(value, scope, ConditionRole::Precondition);
            seen_pre = true;
        } else if (key == ":effect") {
            if (seen_eff) fail(e.items[i], "duplicate :effect");
            std::vector<TypedName> scope = a.params;
            a.effect = cp.parse(value, scope, ConditionRole::Effect);
            seen_eff = true;
        } else {
            fail(e.items[i], "unsupported action keyword '" + key + "'");
        }
        if (!seen_params && (seen_pre || seen_eff)) fail(e.items[i], ":parameters must precede conditions");
    }
    return a;
}

const SExpr& header(const SExpr& root, const char* kind) {
    if (!root.head_is("define") || root.items.size() < 2) fail(root, "expected (define ...)");
    const SExpr& h = root.items[1];
    if (!h.head_is(kind) || h.items.size() != 2) fail(h, std::string("expected (") + kind + " name)");
    check_identifier(h.items[1], "name");
    return h.items[1];
}

}  // namespace

Domain parse_domain(std::string_view text) {
    SExpr root = detail::read_sexpr(text);
    Domain d;
    d.name = header(root, "domain").atom;
    bool seen_predicates = false;
    for (std::size_t i = 2; i < root.items.size(); ++i) {
        const SExpr& section = root.items[i];
        if (section.is_atom || section.items.empty() || !section.items.front().is_atom) fail(section, "expected a domain section");
        const std::string& key = section.items.front().atom;
        if (key == ":requirements") {
            parse_requirements(section, d.requirements);
        } else if (key == ":types") {
            if (seen_predicates || !d.actions.empty()) fail(section, ":types must precede predicates and actions");
            parse_types(section, d);
        } else if (key == ":predicates") {
            if (seen_predicates) fail(section, "duplicate :predicates");
            parse_predicates(section, d);
            seen_predicates = true;
        } else if (key == ":action") {
            ActionSchema a = parse_action_expr(section, d);
            if (d.find_action(a.name)) fail(section, "duplicate action name '" + a.name + "'");
            d.actions.push_back(std::move(a));
        } else {
            fail(section, "unsupported domain section '" + key + "'");
        }
    }
    return d;
}

Problem parse_problem(std::string_view text, const Domain& domain) {
    SExpr root = detail::read_sexpr(text);
    Problem p;
    p.name = header(root, "problem").atom;
    p.goal = Condition::conj();
    bool seen_goal = false;
    std::vector<const SExpr*> init_items;
    for (std::size_t i = 2; i < root.items.size(); ++i) {
        const SExpr& section = root.items[i];
        if (section.is_atom || section.items.empty() || !section.items.front().is_atom) fail(section, "expected a problem section");
        const std::string& key = section.items.front().atom;
        if (key == ":domain") {
            if (section.items.size() != 2) fail(section, "expected (:domain name)");
            p.domain_name = expect_atom(section.items[1], "domain name");
            if (p.domain_name != domain.name) fail(section.items[1], "problem is for domain '" + p.domain_name + "', not '" + domain.name + "'");
        } else if (key == ":objects") {
            for (auto& o : parse_typed_list(section, 1, false)) {
                if (!domain.has_type(o.type)) fail(section, "unknown type '" + o.type + "'");
                if (p.object_type(o.name)) fail(section, "duplicate object '" + o.name + "'");
                p.objects.push_back(std::move(o));
            }
        } else if (key == ":init") {
            for (std::size_t k = 1; k < section.items.size(); ++k) init_items.push_back(&section.items[k]);
        } else if (key == ":goal") {
            if (section.items.size() != 2) fail(section, "expected (:goal condition)");
            seen_goal = true;
            init_items.push_back(nullptr);  // goal parsed after objects are known
            init_items.push_back(&section.items[1]);
        } else {
            fail(section, "unsupported problem section '" + key + "'");
        }
    }
    if (p.domain_name.empty()) fail(root, "missing (:domain ...)");
    if (!seen_goal) fail(root, "missing (:goal ...)");
    ConditionParser cp(domain, &p);
    std::vector<TypedName> scope;
    for (std::size_t k = 0; k < init_items.size(); ++k) {
        if (!init_items[k]) {
            p.goal = cp.parse(*init_items[k + 1], scope, ConditionRole::Goal);
            ++k;
            continue;
        }
        const SExpr& a = *init_items[k];
        if (a.is_atom || a.items.empty()) fail(a, "expected a ground atom in :init");
        if (a.head_is("not") || a.head_is("and") || a.head_is("=")) fail(a, "only positive ground atoms are allowed in :init");
        p.init.insert(cp.parse_atom(a, scope));
    }
    return p;
}

Condition parse_condition(std::string_view text, const Domain& domain, std::span<const TypedName> scope,
                          ConditionRole role, const Problem* problem) {
    SExpr e = detail::read_sexpr(text);
    ConditionParser cp(domain, problem);
    std::vector<TypedName> s(scope.begin(), scope.end());
    return cp.parse(e, s, role);
}

GroundAction parse_ground_action(std::string_view text) {
    SExpr e = detail::read_sexpr(text);
    if (e.is_atom || e.items.empty()) fail(e, "expected (action arg ...)");
    GroundAction g;
    for (std::size_t i = 0; i < e.items.size(); ++i) {
        const std::string& s = expect_atom(e.items[i], "identifier");
        if (is_variable(s)) fail(e.items[i], "ground action cannot contain variables");
        if (i == 0) g.name = s; else g.args.push_back(s);
    }
    return g;
}

Atom parse_ground_atom(std::string_view text, const Domain& domain, const Problem* problem) {
    SExpr e = detail::read_sexpr(text);
    if (e.is_atom || e.items.empty()) fail(e, "expected (predicate arg ...)");
    if (e.head_is("not")) fail(e, "expected a positive atom");
    ConditionParser cp(domain, problem);
    std::vector<TypedName> scope;
    Atom a = cp.parse_atom(e, scope);
    return a;
}

ActionSchema parse_action(std::string_view text, const Domain& domain) {
    return parse_action_expr(detail::read_sexpr(text), domain);
}

}  // namespace induct::pddl

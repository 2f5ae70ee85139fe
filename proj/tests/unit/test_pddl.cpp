#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <random>

using namespace induct;
using namespace induct::pddl;
using induct::test::atom;

namespace {

const char* small_problem = R"(
(define (problem p1) (:domain blocksworld)
  (:objects a b - block)
  (:init (arm-empty) (clear b) (on-table b) (on-table a) (clear a))
  (:goal (and (on a b))))
)";

Problem problem_for(const Domain& d, std::string_view text = small_problem) { return parse_problem(text, d); }

// Independent evaluator: atoms as printed strings, recursion over the printed-string view of literals.
bool oracle_holds(const std::set<std::string>& facts, const Condition& c) {
    switch (c.kind) {
    case Condition::Kind::Literal: {
        bool in = facts.count(c.literal.atom.str()) != 0;
        return c.literal.negated ? !in : in;
    }
    case Condition::Kind::And: {
        int sat = 0;
        for (const auto& ch : c.children) sat += oracle_holds(facts, ch) ? 1 : 0;
        return sat == static_cast<int>(c.children.size());
    }
    case Condition::Kind::Or: {
        int sat = 0;
        for (const auto& ch : c.children) sat += oracle_holds(facts, ch) ? 1 : 0;
        return sat > 0;
    }
    default:
        throw std::logic_error("oracle: unsupported node");
    }
}

Condition random_tree(std::mt19937& rng, const std::vector<Atom>& atoms, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 2 : 0);
    int kind = pick(rng);
    if (kind == 0) {
        const Atom& a = atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
        return Condition::lit(a, std::bernoulli_distribution(0.4)(rng));
    }
    std::vector<Condition> children;
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n; ++i) children.push_back(random_tree(rng, atoms, depth - 1));
    return kind == 1 ? Condition::conj(std::move(children)) : Condition::disj(std::move(children));
}

}  // namespace

TEST_CASE("blocksworld domain parses with the four arm actions") {
    Domain d = test::blocksworld();
    REQUIRE(d.actions.size() == 4);
    std::vector<std::string> names;
    for (const auto& a : d.actions) names.push_back(a.name);
    CHECK(names == std::vector<std::string>{"pickup", "putdown", "stack", "unstack"});
    CHECK(d.find_predicate("on")->params.size() == 2);
    CHECK(d.is_subtype("block", "object"));
}

TEST_CASE("domain without actions") {
    Domain d = parse_domain("(define (domain d) (:predicates (p ?x)) )");
    CHECK(d.name == "d");
    CHECK(d.actions.empty());
    REQUIRE(d.predicates.size() == 1);
    CHECK(d.predicates[0].params[0].type == "object");
}

TEST_CASE("identifiers are canonicalized to lowercase") {
    Domain d = parse_domain("(define (domain D) (:predicates (P ?X)) (:action Go :parameters (?Y) "
                            ":precondition (P ?Y) :effect (not (P ?y))))");
    CHECK(d.name == "d");
    REQUIRE(d.actions.size() == 1);
    CHECK(d.actions[0].name == "go");
    CHECK(d.actions[0].precondition.literal.atom.str() == "(p ?y)");
}

TEST_CASE("conditional effect parses into a when node") {
    Domain d = parse_domain(R"(
      (define (domain cond) (:requirements :strips :conditional-effects)
        (:predicates (clear ?x) (on-table ?x) (held ?x))
        (:action drop :parameters (?x)
          :precondition (held ?x)
          :effect (and (not (held ?x)) (when (clear ?x) (on-table ?x)))))
    )");
    Condition expected = Condition::conj({
        Condition::lit(atom("held", {"?x"}), true),
        Condition::when(Condition::lit(atom("clear", {"?x"})), Condition::lit(atom("on-table", {"?x"}))),
    });
    REQUIRE(d.actions.size() == 1);
    CHECK(d.actions[0].effect == expected);
}

TEST_CASE("printing") {
    SUBCASE("round trip of the blocksworld domain") {
        Domain d = test::blocksworld();
        CHECK(parse_domain(print_domain(d)) == d);
    }
    SUBCASE("when effect golden string") {
        Condition c = Condition::conj({Condition::when(Condition::lit(atom("clear", {"?x"})),
                                                       Condition::lit(atom("on-table", {"?x"})))});
        CHECK(print_condition(c) == "(and (when (clear ?x) (on-table ?x)))");
    }
    SUBCASE("empty and") {
        CHECK(print_condition(Condition::conj()) == "(and )");
        CHECK(holds(State{}, Condition::conj()));
    }
    SUBCASE("empty init section is omitted and re-parses") {
        Domain d = test::blocksworld();
        Problem p = parse_problem("(define (problem e) (:domain blocksworld) (:objects a - block) (:goal (and (clear a))))", d);
        std::string text = print_problem(p);
        CHECK(text.find(":init") == std::string::npos);
        CHECK(parse_problem(text, d) == p);
    }
    SUBCASE("init atoms print sorted") {
        Domain d = test::blocksworld();
        std::string text = print_problem(problem_for(d));
        auto arm = text.find("(arm-empty)");
        auto clear = text.find("(clear a)");
        auto table = text.find("(on-table a)");
        CHECK(arm < clear);
        CHECK(clear < table);
    }
}

TEST_CASE("ground substitutes schema parameters") {
    Domain d = test::blocksworld();
    Problem p = parse_problem(R"((define (problem t) (:domain blocksworld) (:objects green - block) (:goal (and (holding green)))))", d);
    std::vector<std::string> args{"green"};
    GroundedAction g = ground(d, *d.find_action("pickup"), args, p);
    Condition expected = Condition::conj({Condition::lit(atom("clear", {"green"})),
                                          Condition::lit(atom("on-table", {"green"})),
                                          Condition::lit(atom("arm-empty"))});
    CHECK(g.precondition == expected);
    CHECK(print_condition(g.effect) ==
          "(and (holding green) (not (clear green)) (not (on-table green)) (not (arm-empty)))");

    SUBCASE("arity and type violations") {
        std::vector<std::string> two{"green", "green"};
        CHECK_THROWS_AS(ground(d, *d.find_action("pickup"), two, p), PddlError);
        std::vector<std::string> unknown{"ghost"};
        CHECK_THROWS_AS(ground(d, *d.find_action("pickup"), unknown, p), PddlError);
    }
}

TEST_CASE("ground of a parameterless schema is the identity") {
    Domain d = parse_domain("(define (domain z) (:predicates (p) (q)) "
                            "(:action flip :parameters () :precondition (and (p)) :effect (and (q) (not (p)))))");
    Problem p = parse_problem("(define (problem z1) (:domain z) (:goal (q)))", d);
    GroundedAction g = ground(d, d.actions[0], {}, p);
    CHECK(g.precondition == d.actions[0].precondition);
    CHECK(g.effect == d.actions[0].effect);
}

TEST_CASE("exists over a type without objects is false") {
    Domain d = parse_domain(R"(
      (define (domain ex) (:requirements :typing :existential-preconditions)
        (:types gem tool - object)
        (:predicates (owned ?g - gem) (ready))
        (:action use :parameters ()
          :precondition (exists (?g - gem) (owned ?g))
          :effect (ready)))
    )");
    Problem p = parse_problem("(define (problem e1) (:domain ex) (:objects t - tool) (:goal (ready)))", d);
    GroundedAction g = ground(d, d.actions[0], {}, p);
    CHECK(g.precondition.kind == Condition::Kind::Or);
    CHECK(g.precondition.children.empty());
    CHECK_FALSE(holds(State{}, g.precondition));

    Problem p2 = parse_problem("(define (problem e2) (:domain ex) (:objects ruby - gem) (:init (owned ruby)) (:goal (ready)))", d);
    GroundedAction g2 = ground(d, d.actions[0], {}, p2);
    CHECK(holds(p2.initial_state(), g2.precondition));
}

TEST_CASE("holds") {
    CHECK(holds(State{{atom("arm-empty")}}, Condition::lit(atom("arm-empty"))));
    CHECK(holds(State{}, Condition::lit(atom("arm-empty"), true)));
    State s{{atom("on", {"a", "b"}), atom("clear", {"a"})}};
    Condition c = Condition::conj({Condition::lit(atom("clear", {"a"})),
                                   Condition::disj({Condition::lit(atom("on", {"a", "b"})),
                                                    Condition::lit(atom("on", {"b", "a"}))})});
    CHECK(holds(s, c) == oracle_holds({"(on a b)", "(clear a)"}, c));
    CHECK(holds(s, c));
    CHECK_THROWS_AS(holds(s, Condition::lit(atom("clear", {"?x"}))), PddlError);
}

TEST_CASE("holds agrees with a truth-table evaluator on random small trees") {
    std::vector<Atom> atoms{atom("p"), atom("q", {"a"}), atom("r", {"a", "b"})};
    std::mt19937 rng(7);
    for (int t = 0; t < 300; ++t) {
        Condition c = random_tree(rng, atoms, 3);
        for (unsigned mask = 0; mask < 8; ++mask) {
            State s;
            std::set<std::string> facts;
            for (unsigned i = 0; i < 3; ++i) {
                if (mask & (1u << i)) {
                    s.atoms.insert(atoms[i]);
                    facts.insert(atoms[i].str());
                }
            }
            REQUIRE(holds(s, c) == oracle_holds(facts, c));
        }
    }
}

TEST_CASE("apply") {
    Domain d = test::blocksworld();
    Problem p = problem_for(d);
    State s{{atom("arm-empty"), atom("clear", {"b"}), atom("on-table", {"b"})}};
    std::vector<std::string> args{"b"};
    State next = apply(s, ground(d, *d.find_action("pickup"), args, p).effect);
    CHECK(next == State{{atom("holding", {"b"})}});

    CHECK(apply(s, Condition::conj()) == s);

    Condition w = Condition::when(Condition::lit(atom("p")), Condition::lit(atom("q")));
    CHECK(apply(State{{atom("p")}}, w) == State{{atom("p"), atom("q")}});
    CHECK(apply(State{}, w) == State{});

    SUBCASE("when antecedents read the pre-state") {
        Condition eff = Condition::conj({Condition::lit(atom("p"), true),
                                         Condition::when(Condition::lit(atom("p")), Condition::lit(atom("q")))});
        CHECK(apply(State{{atom("p")}}, eff) == State{{atom("q")}});
    }
    SUBCASE("add wins over delete of the same atom") {
        Condition eff = Condition::conj({Condition::lit(atom("p"), true), Condition::lit(atom("p"))});
        CHECK(apply(State{}, eff) == State{{atom("p")}});
    }
    SUBCASE("or inside an effect is rejected") {
        CHECK_THROWS_AS(apply(State{}, Condition::disj({Condition::lit(atom("p"))})), PddlError);
    }
}

TEST_CASE("apply touches only atoms named in the effect") {
    std::vector<Atom> universe;
    for (const char* pred : {"p", "q", "r", "s"})
        for (const char* arg : {"a", "b", "c"}) universe.push_back(atom(pred, {arg}));
    std::mt19937 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, universe.size() - 1);
    for (int t = 0; t < 500; ++t) {
        State s;
        for (const auto& a : universe)
            if (std::bernoulli_distribution(0.5)(rng)) s.atoms.insert(a);
        std::vector<Condition> parts;
        std::set<Atom> named;
        int n = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int i = 0; i < n; ++i) {
            const Atom& a = universe[pick(rng)];
            named.insert(a);
            if (std::bernoulli_distribution(0.3)(rng)) {
                const Atom& g = universe[pick(rng)];
                parts.push_back(Condition::when(Condition::lit(g), Condition::lit(a, std::bernoulli_distribution(0.5)(rng))));
            } else {
                parts.push_back(Condition::lit(a, std::bernoulli_distribution(0.5)(rng)));
            }
        }
        State next = apply(s, Condition::conj(parts));
        for (const auto& a : universe) {
            if (named.count(a)) continue;
            REQUIRE(next.contains(a) == s.contains(a));
        }
    }
}

TEST_CASE("applicable") {
    Domain d = test::blocksworld();
    Problem p = problem_for(d);
    State s{{atom("arm-empty"), atom("clear", {"b"}), atom("on-table", {"b"})}};
    CHECK(applicable(s, GroundAction{"pickup", {"b"}}, d, p));
    CHECK_FALSE(applicable(State{}, GroundAction{"pickup", {"b"}}, d, p));
    CHECK_THROWS_AS(applicable(s, GroundAction{"fly", {"b"}}, d, p), PddlError);

    Problem t1 = parse_problem(R"(
      (define (problem task1) (:domain blocksworld)
        (:objects orange green yellow blue - block)
        (:init (on orange green) (on green yellow) (on-table yellow) (on-table blue)
               (clear orange) (clear blue) (arm-empty))
        (:goal (and (on yellow orange) (on green blue)))))", d);
    CHECK(applicable(t1.initial_state(), GroundAction{"unstack", {"orange", "green"}}, d, t1));
    CHECK_FALSE(applicable(t1.initial_state(), GroundAction{"pickup", {"orange"}}, d, t1));
}

TEST_CASE("enumerate ground actions is type-conformant and sorted") {
    Domain d = test::blocksworld();
    Problem p = problem_for(d);
    auto all = enumerate_ground_actions(d, p);
    CHECK(all.size() == 2 + 2 + 4 + 4);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].str() < all[i].str());
}

TEST_CASE("parse errors") {
    SUBCASE("syntax error reports line and column") {
        try {
            parse_domain("(define (domain d)\n  (:predicates (p ?x)\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() >= 1);
            CHECK(e.column() >= 1);
        }
        try {
            parse_domain("(define (domain d)\n  (:predicates (p ?x)))\n)");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            CHECK(e.column() == 1);
        }
    }
    SUBCASE("unknown type") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:requirements :typing) (:predicates (p ?x - thing)))"), ParseError);
    }
    SUBCASE("arity mismatch") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x)) "
                                     "(:action a :parameters (?x) :precondition (p ?x ?x) :effect (p ?x)))"),
                        ParseError);
    }
    SUBCASE("duplicate action") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p)) "
                                     "(:action a :parameters () :effect (p)) (:action A :parameters () :effect (p)))"),
                        ParseError);
    }
    SUBCASE("unsupported requirement") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:requirements :fluents) (:predicates (p)))"), ParseError);
    }
    SUBCASE("exists in effect") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x) (q)) "
                                     "(:action a :parameters () :effect (exists (?x) (p ?x))))"),
                        ParseError);
    }
    SUBCASE("unbound variable") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x)) "
                                     "(:action a :parameters () :precondition (p ?y) :effect (and)))"),
                        ParseError);
    }
    SUBCASE("problem with undeclared object in init") {
        Domain d = test::blocksworld();
        CHECK_THROWS_AS(parse_problem("(define (problem x) (:domain blocksworld) (:objects a - block) "
                                      "(:init (clear z)) (:goal (clear a)))", d),
                        ParseError);
    }
}

TEST_CASE("gridquest domain exercises or, when and exists-free moves") {
    Domain d = test::gridquest();
    CHECK(d.actions.size() == 4);
    CHECK(parse_domain(print_domain(d)) == d);
}

TEST_CASE("golden corpus round-trips") {
    namespace fs = std::filesystem;
    std::map<std::string, Domain> domains;
    std::vector<fs::path> problems;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(test::test_dir() / "corpus"))
        if (e.path().extension() == ".pddl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    REQUIRE(files.size() >= 20);
    for (const auto& f : files) {
        std::string text = test::read_file(f);
        if (text.find("(:domain") != std::string::npos) {
            problems.push_back(f);
            continue;
        }
        INFO(f.string());
        Domain d = parse_domain(text);
        CHECK(parse_domain(print_domain(d)) == d);
        domains[d.name] = d;
    }
    for (const auto& f : problems) {
        INFO(f.string());
        std::string text = test::read_file(f);
        auto start = text.find("(:domain") + 8;
        auto stop = text.find(')', start);
        std::string name = canonical(text.substr(start, stop - start));
        name.erase(0, name.find_first_not_of(' '));
        REQUIRE(domains.count(name));
        Problem p = parse_problem(text, domains[name]);
        CHECK(parse_problem(print_problem(p), domains[name]) == p);
    }
}

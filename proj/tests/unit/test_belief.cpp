#include "support.hpp"

#include "induct/belief.hpp"
#include "induct/envs.hpp"
#include "induct/planner.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace induct;
using namespace induct::belief;
using induct::test::atom;
using pddl::Condition;
using pddl::Domain;

namespace {

// Reference for the forgetting rule, written as the two-branch formula with explicit clamps.
double scalar_oracle(double p, int in, int neg, double alpha = 0.7, double beta = 0.8) {
    double next;
    if (p == 0.0) next = 1.0 * in - alpha * neg;
    else next = beta * p + (1.0 - beta) * in - alpha * (1.0 - beta) * neg;
    if (next < 0.0) next = 0.0;
    if (next > 1.0) next = 1.0;
    return next;
}

ProposedSemantics propose(std::string action, Condition pre, Condition post = Condition::conj()) {
    ProposedSemantics s;
    s.actions[action] = ActionSemantics{std::move(pre), std::move(post)};
    return s;
}

Condition lit(const char* pred, bool neg = false) { return Condition::lit(atom(pred, {"?ob"}), neg); }

}  // namespace

TEST_CASE("update rule values") {
    BeliefConfig cfg;
    CHECK(std::abs(update_belief(0.0, true, false, cfg) - 1.0) < 1e-12);
    CHECK(std::abs(update_belief(0.0, true, true, cfg) - 0.3) < 1e-12);
    CHECK(std::abs(update_belief(0.5, true, false, cfg) - 0.6) < 1e-12);
    CHECK(std::abs(update_belief(0.5, false, false, cfg) - 0.4) < 1e-12);
    CHECK(std::abs(update_belief(0.5, false, true, cfg) - 0.26) < 1e-12);
    for (double p : {0.0, 0.1, 0.5, 0.99, 1.0})
        for (int in : {0, 1})
            for (int neg : {0, 1}) CHECK(update_belief(p, in, neg, cfg) == doctest::Approx(scalar_oracle(p, in, neg)).epsilon(1e-12));
    BeliefConfig bad;
    bad.beta = 1.0;
    CHECK_THROWS_AS(bad.validate(), BeliefError);
}

TEST_CASE("negate") {
    pddl::Literal arm{atom("arm-empty"), true};
    CHECK(negate(arm).str() == "(arm-empty)");
    CHECK(negate(negate(arm)) == arm);
    CHECK(negate(pddl::Literal{atom("clear", {"?ob"})}).str() == "(not (clear ?ob))");
}

TEST_CASE("path enumeration") {
    Domain d = test::blocksworld();
    auto putdown = enumerate_paths("putdown", Kind::Pre, d.find_action("putdown")->precondition);
    CHECK(putdown == std::vector<std::string>{"putdown_pre-and-(holding ?ob)"});
    CHECK(enumerate_paths("x", Kind::Pre, Condition::conj()).empty());

    Condition c = Condition::conj({Condition::lit(atom("arm-empty")),
                                   Condition::disj({Condition::lit(atom("p")), Condition::lit(atom("q"))})});
    CHECK(enumerate_paths("a", Kind::Pre, c) ==
          std::vector<std::string>{"a_pre-and-(arm-empty)", "a_pre-and-or-(p)", "a_pre-and-or-(q)"});

    SUBCASE("a bare literal root is wrapped in an and") {
        CHECK(enumerate_paths("a", Kind::Post, Condition::lit(atom("p"))) == std::vector<std::string>{"a_post-and-(p)"});
    }
    SUBCASE("conditional effects carry their antecedent") {
        Condition w = Condition::conj({Condition::when(Condition::lit(atom("clear", {"?x"})),
                                                       Condition::conj({Condition::lit(atom("on-table", {"?x"})),
                                                                        Condition::lit(atom("p"), true)}))});
        CHECK(enumerate_paths("drop", Kind::Post, w) ==
              std::vector<std::string>{"drop_post-and-when(clear ?x)-(on-table ?x)", "drop_post-and-when(clear ?x)-(not (p))"});
    }
    SUBCASE("sibling disjunctions stay apart") {
        Condition two = Condition::conj({Condition::disj({Condition::lit(atom("p")), Condition::lit(atom("q"))}),
                                         Condition::disj({Condition::lit(atom("r")), Condition::lit(atom("s"))})});
        CHECK(enumerate_paths("a", Kind::Pre, two) ==
              std::vector<std::string>{"a_pre-and-or-(p)", "a_pre-and-or-(q)", "a_pre-and-or2-(r)", "a_pre-and-or2-(s)"});
    }
    SUBCASE("whole domain") {
        auto all = enumerate_paths(d);
        CHECK(all.size() == 3 + 4 + 1 + 4 + 2 + 5 + 3 + 5);
        CHECK(std::count(all.begin(), all.end(), "putdown_post-and-(arm-empty)") == 1);
    }
}

TEST_CASE("memory update follows the scalar rule") {
    BeliefConfig cfg;
    Memory m;
    m = m.update(propose("putdown", Condition::conj({lit("holding"), lit("holding", true)})), cfg);
    CHECK(m.belief("putdown_pre-and-(holding ?ob)") == doctest::Approx(0.3));
    CHECK(m.belief("putdown_pre-and-(not (holding ?ob))") == doctest::Approx(0.3));

    m = m.update(propose("putdown", Condition::conj({lit("holding")})), cfg);
    CHECK(m.belief("putdown_pre-and-(holding ?ob)") == doctest::Approx(scalar_oracle(0.3, 1, 0)));
    CHECK(m.belief("putdown_pre-and-(not (holding ?ob))") == doctest::Approx(scalar_oracle(0.3, 0, 1)));

    SUBCASE("negation links are symmetric") {
        const Statement* pos = m.find("putdown_pre-and-(holding ?ob)");
        const Statement* neg = m.find("putdown_pre-and-(not (holding ?ob))");
        REQUIRE(pos);
        REQUIRE(neg);
        CHECK(m.negation(*pos) == neg);
        CHECK(m.negation(*neg) == pos);
        CHECK(m.leaves().size() == 2);
    }
    SUBCASE("ill-formed predictions are rejected") {
        CHECK_THROWS_AS(m.update(propose("a", Condition::conj(), Condition::disj({lit("p")})), cfg), BeliefError);
        CHECK_THROWS_AS(m.update(propose("a", Condition::when(lit("p"), lit("q"))), cfg), BeliefError);
    }
}

TEST_CASE("random prediction streams stay in bounds and match the scalar oracle") {
    BeliefConfig cfg;
    std::mt19937 rng(1);
    std::vector<std::string> preds{"p", "q", "r"};
    for (int stream = 0; stream < 10000; ++stream) {
        Memory m;
        std::map<std::string, double> expect;
        int len = 1 + stream % 6;
        for (int t = 0; t < len; ++t) {
            std::vector<Condition> parts;
            std::set<std::string> keys;
            for (const auto& p : preds)
                for (bool neg : {false, true})
                    if (rng() % 3 == 0) {
                        parts.push_back(Condition::lit(atom(p), neg));
                        keys.insert(std::string("a_pre-and-") + (neg ? "(not (" + p + "))" : "(" + p + ")"));
                    }
            m = m.update(propose("a", Condition::conj(parts)), cfg);
            for (const auto& k : keys) expect.emplace(k, 0.0);
            for (auto& [k, p] : expect) {
                bool negated = k.find("(not ") != std::string::npos;
                std::string neg_key = negated ? "a_pre-and-" + k.substr(k.find("(not ") + 5, k.size() - k.find("(not ") - 6)
                                              : "a_pre-and-(not " + k.substr(10) + ")";
                p = scalar_oracle(p, keys.count(k), keys.count(neg_key));
            }
        }
        REQUIRE(m.leaves().size() == expect.size());
        for (const auto& s : m.leaves()) {
            REQUIRE(s.belief >= 0.0);
            REQUIRE(s.belief <= 1.0);
            REQUIRE(std::abs(s.belief - expect.at(s.path_key)) < 1e-12);
        }
    }
}

TEST_CASE("fixed points") {
    BeliefConfig cfg;
    Memory m;
    m = m.update(propose("a", Condition::conj({lit("p")})), cfg);
    m.set_belief("a_pre-and-(p ?ob)", 0.2);
    double last = 0.2;
    for (int i = 0; i < 200; ++i) {
        m = m.update(propose("a", Condition::conj({lit("p")})), cfg);
        double now = m.belief("a_pre-and-(p ?ob)");
        CHECK(now >= last);
        last = now;
    }
    CHECK(last == doctest::Approx(1.0));
    for (int i = 0; i < 20; ++i) {
        m = m.update(ProposedSemantics{}, cfg);
        double now = m.belief("a_pre-and-(p ?ob)");
        CHECK(now == doctest::Approx(last * cfg.beta));
        last = now;
    }
}

TEST_CASE("sampling") {
    Domain d = test::blocksworld();
    Domain skeleton = pddl::strip_semantics(d);
    BeliefConfig cfg;
    Memory full = Memory{}.update(ProposedSemantics::from_domain(d), cfg);
    for (const auto& s : full.leaves()) REQUIRE(s.belief == 1.0);

    SUBCASE("belief one keeps everything, for any seed") {
        std::mt19937_64 a(1), b(2);
        Domain da = full.sample(skeleton, a);
        CHECK(da == full.sample(skeleton, b));
        CHECK(enumerate_paths(da) == enumerate_paths(d));
        CHECK(pddl::parse_domain(pddl::print_domain(da)) == da);
    }
    SUBCASE("belief zero keeps nothing") {
        Memory zero = full;
        for (const auto& s : full.leaves()) zero.set_belief(s.path_key, 0.0);
        std::mt19937_64 rng(3);
        Domain dz = zero.sample(skeleton, rng);
        for (const auto& a : dz.actions) {
            CHECK(a.precondition.is_empty_and());
            CHECK(a.effect.is_empty_and());
        }
        CHECK(pddl::print_domain(dz).find("(and )") != std::string::npos);
    }
    SUBCASE("a half-belief leaf shows up half the time") {
        Memory m = full;
        m.set_belief("pickup_pre-and-(arm-empty)", 0.5);
        std::mt19937_64 rng(cfg.seed);
        int hits = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            auto paths = enumerate_paths(m.sample(skeleton, rng));
            hits += std::count(paths.begin(), paths.end(), "pickup_pre-and-(arm-empty)") > 0;
        }
        double freq = static_cast<double>(hits) / n;
        CHECK(std::abs(freq - 0.5) <= 0.02);
        CHECK(std::abs(freq - 0.5) <= 3 * std::sqrt(0.25 / n));
    }
}

TEST_CASE("threshold domain reproduces the gridquest semantics") {
    Domain g = test::gridquest();
    Memory m = Memory{}.update(ProposedSemantics::from_domain(g), BeliefConfig{});
    Domain back = m.threshold_domain(pddl::strip_semantics(g));
    CHECK(enumerate_paths(back) == enumerate_paths(g));
    auto kept = m.paths_at_threshold();
    auto truth = enumerate_paths(g);
    CHECK(std::set<std::string>(kept.begin(), kept.end()) == std::set<std::string>(truth.begin(), truth.end()));
    auto task = envs::load_task("gridquest", "1");
    auto r = planner::plan(back, task.problem);
    REQUIRE(r.complete());
    CHECK(planner::validate_plan(g, task.problem, r.plan).valid);
}

TEST_CASE("serialization round trip") {
    Domain g = test::gridquest();
    Memory m = Memory{}.update(ProposedSemantics::from_domain(g), BeliefConfig{});
    m.set_belief(m.leaves()[3].path_key, 0.1 + 0.2);
    std::string text = m.serialize();
    Memory back = Memory::deserialize(text, pddl::strip_semantics(g));
    CHECK(back.serialize() == text);
    CHECK(back.paths() == m.paths());
    CHECK(back.leaves()[3].belief == m.leaves()[3].belief);
    CHECK_THROWS_AS(Memory::deserialize("up\tpre\tup_pre-xor-(agent-at ?from)\t1\n", g), BeliefError);
    CHECK_THROWS_AS(Memory::deserialize("fly\tpre\tfly_pre-and-(p)\t1\n", g), BeliefError);
}

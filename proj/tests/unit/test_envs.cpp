#include "support.hpp"

#include "induct/envs.hpp"

#include <doctest.h>

#include <deque>
#include <map>

using namespace induct;
using namespace induct::envs;
using induct::test::atom;

namespace {

EnvConfig config(std::string env, std::string task) {
    EnvConfig cfg;
    cfg.env = std::move(env);
    cfg.task = std::move(task);
    return cfg;
}

pddl::GroundAction act(const char* s) { return pddl::parse_ground_action(s); }

// Hand-written blocksworld rules, independent of the PDDL machinery.
bool bw_applicable(const pddl::State& s, const pddl::GroundAction& a) {
    auto has = [&](std::string p, std::vector<std::string> args) { return s.contains(pddl::Atom{p, args}); };
    const auto& x = a.args[0];
    if (a.name == "pickup") return has("clear", {x}) && has("on-table", {x}) && has("arm-empty", {});
    if (a.name == "putdown") return has("holding", {x});
    if (a.name == "stack") return has("holding", {x}) && has("clear", {a.args[1]});
    if (a.name == "unstack") return has("on", {x, a.args[1]}) && has("clear", {x}) && has("arm-empty", {});
    return false;
}

std::vector<pddl::GroundAction> applicable_actions(const Environment& env) {
    std::vector<pddl::GroundAction> out;
    for (const auto& a : pddl::enumerate_ground_actions(env.task().domain, env.task().problem))
        if (pddl::applicable(env.true_state(), a, env.task().domain, env.task().problem)) out.push_back(a);
    return out;
}

}  // namespace

TEST_CASE("task files load") {
    Task t = load_task("blocksworld", "2");
    CHECK(t.reference_plan.size() == 8);
    CHECK(t.alternative_plans.size() == 1);
    CHECK_THROWS_AS(load_task("blocksworld", "nope"), EnvError);
    Task g = load_task("gridquest", "1");
    CHECK(g.problem.objects.size() == 36);
    CHECK(g.problem.init.count(atom("wraith-at", {"c52"})));
    CHECK(g.problem.init.count(atom("north", {"c10", "c00"})));
    CHECK(g.rules_text.find("Scissors") != std::string::npos);
}

TEST_CASE("blocksworld task 1 reset and steps") {
    auto env = make_environment(config("blocksworld", "1"));
    Observation obs = env->reset();
    std::set<pddl::Atom> expected{atom("on", {"orange", "green"}), atom("on", {"green", "yellow"}),
                                  atom("on-table", {"yellow"}),   atom("on-table", {"blue"}),
                                  atom("clear", {"orange"}),      atom("clear", {"blue"}),
                                  atom("arm-empty")};
    CHECK(obs.atoms.atoms == expected);
    CHECK(obs.known_objects.size() == 4);

    auto before = env->true_state();
    auto fb = env->step(act("(pickup orange)"));
    CHECK(fb.status == StepStatus::NoChange);
    CHECK(env->true_state() == before);

    fb = env->step(act("(unstack orange green)"));
    CHECK(fb.status == StepStatus::Applied);
    CHECK(fb.step_index == 1);
    CHECK(fb.observation.atoms.contains(atom("holding", {"orange"})));
    CHECK_FALSE(fb.goal_reached);

    CHECK_THROWS_AS(env->step(act("(pickup orange green)")), EnvError);
    CHECK_THROWS_AS(env->step(act("(fly orange)")), EnvError);
    CHECK_THROWS_AS(make_environment(config("blocksworld", "99")), EnvError);
}

TEST_CASE("reference plans reach the goal in the simulator") {
    for (const char* id : {"1", "2", "3", "small"}) {
        auto env = make_environment(config("blocksworld", id));
        env->reset();
        ExecutionFeedback fb;
        for (const auto& a : env->task().reference_plan) {
            fb = env->step(a);
            REQUIRE(fb.status == StepStatus::Applied);
        }
        CHECK(fb.goal_reached);
    }
}

TEST_CASE("hidden-domain fidelity on every reachable three-block state") {
    auto env = make_environment(config("blocksworld", "small"));
    const auto& task = env->task();
    auto ops = pddl::enumerate_ground_actions(task.domain, task.problem);
    // BFS over states, remembering one path to each
    std::map<std::set<pddl::Atom>, std::vector<pddl::GroundAction>> paths;
    std::deque<std::set<pddl::Atom>> frontier;
    paths[task.problem.init] = {};
    frontier.push_back(task.problem.init);
    std::size_t checked = 0;
    while (!frontier.empty()) {
        auto s = frontier.front();
        frontier.pop_front();
        const auto path = paths[s];
        for (const auto& op : ops) {
            env->reset();
            for (const auto& a : path) REQUIRE(env->step(a).status == StepStatus::Applied);
            REQUIRE(env->true_state().atoms == s);
            auto fb = env->step(op);
            bool ok = bw_applicable(pddl::State{s}, op);
            ++checked;
            if (!ok) {
                REQUIRE(fb.status == StepStatus::NoChange);
                REQUIRE(env->true_state().atoms == s);
                continue;
            }
            REQUIRE(fb.status == StepStatus::Applied);
            auto g = pddl::ground(task.domain, *task.domain.find_action(op.name), op.args, task.problem);
            REQUIRE(env->true_state() == pddl::apply(pddl::State{s}, g.effect));
            const auto& next = env->true_state().atoms;
            if (!paths.count(next)) {
                auto p = path;
                p.push_back(op);
                paths[next] = p;
                frontier.push_back(next);
            }
        }
    }
    CHECK(paths.size() == 22);  // 13 arrangements with the arm empty + 9 holding states
    CHECK(checked == 22 * ops.size());
}

TEST_CASE("same seed and actions give the same feedback") {
    auto run = [](std::uint64_t seed) {
        EnvConfig cfg = config("blocksworld", "2");
        cfg.noise_probability = 0.3;
        cfg.seed = seed;
        auto env = make_environment(cfg);
        env->reset();
        std::mt19937 pick(5);
        std::vector<std::string> log;
        for (int i = 0; i < 200; ++i) {
            auto acts = applicable_actions(*env);
            auto fb = env->step(acts[pick() % acts.size()]);
            log.push_back(to_string(fb.status) + fb.observation.text());
        }
        return log;
    };
    CHECK(run(1) == run(1));
    CHECK(run(1) != run(2));
}

TEST_CASE("noise corrupts stack and putdown at the configured rate") {
    EnvConfig cfg = config("blocksworld", "1");
    cfg.noise_probability = 0.2;
    cfg.seed = 42;
    auto env = make_environment(cfg);
    env->reset();
    std::mt19937 pick(9);
    int releases = 0, corrupted = 0;
    while (releases < 10000) {
        auto acts = applicable_actions(*env);
        auto a = acts[pick() % acts.size()];
        auto before = env->true_state();
        env->step(a);
        if (a.name == "stack" || a.name == "putdown") {
            ++releases;
            if (env->last_step_corrupted()) {
                ++corrupted;
                // the block still ends up released somewhere other than the commanded target
                CHECK(env->true_state().contains(atom("arm-empty")));
                auto g = pddl::ground(env->task().domain, *env->task().domain.find_action(a.name), a.args,
                                      env->task().problem);
                CHECK(env->true_state() != pddl::apply(before, g.effect));
            }
        } else {
            CHECK_FALSE(env->last_step_corrupted());
        }
    }
    double freq = static_cast<double>(corrupted) / releases;
    CHECK(std::abs(freq - 0.2) <= 0.02);
}

TEST_CASE("gridquest observability") {
    SUBCASE("full mode shows the true state") {
        auto env = make_environment(config("gridquest", "1"));
        auto obs = env->reset();
        CHECK(obs.atoms == env->true_state());
        CHECK(env->observe() == obs);
    }
    SUBCASE("partial mode starts with the start cell neighbourhood and grows") {
        EnvConfig cfg = config("gridquest", "1");
        cfg.observability = Observability::Partial;
        auto env = make_environment(cfg);
        auto obs = env->reset();
        std::set<std::string> known;
        for (const auto& o : obs.known_objects) known.insert(o.name);
        CHECK(known == std::set<std::string>{"c00", "c01", "c10", "c11"});
        for (const auto& a : obs.atoms.atoms) CHECK(env->true_state().contains(a));
        CHECK(obs.atoms.contains(atom("has-rock")) == false);
        CHECK(obs.atoms.contains(atom("agent-at", {"c00"})));
        CHECK_FALSE(obs.atoms.contains(atom("rock-at", {"c12"})));

        // serpentine walk that covers the grid while avoiding the monsters' cells
        std::vector<std::string> route;
        std::string at = "c00";
        auto move = [&](int r, int c) {
            std::string to = cell_name(r, c);
            int fr = at[1] - '0', fc = at[2] - '0';
            const char* name = r < fr ? "up" : r > fr ? "down" : c < fc ? "left" : "right";
            auto before = env->observe().known_objects.size();
            auto fb = env->step(pddl::GroundAction{name, {at, to}});
            REQUIRE(fb.status == StepStatus::Applied);
            CHECK(fb.observation.known_objects.size() >= before);
            for (const auto& a : fb.observation.atoms.atoms) CHECK(env->true_state().contains(a));
            at = to;
        };
        for (int c = 1; c < 6; ++c) move(0, c);
        move(1, 5); move(2, 5); move(3, 5); move(4, 5); move(4, 4); move(3, 4);
        for (int c = 3; c >= 0; --c) move(3, c);
        move(2, 0); move(2, 1); move(1, 1); move(1, 2);
        move(1, 3); move(2, 3); move(3, 3);
        move(3, 2); move(3, 1); move(4, 1); move(5, 1); move(5, 0); move(4, 0);
        CHECK(env->observe().atoms == env->true_state());
        CHECK(env->observe().known_objects.size() == 36);

        env->reset();
        CHECK(env->observe().known_objects.size() == 4);
    }
}

TEST_CASE("gridquest fatal contact restarts the episode") {
    auto env = make_environment(config("gridquest", "1"));
    env->reset();
    std::string at = "c00";
    for (const char* to : {"c10", "c20", "c30", "c40", "c50"}) {
        REQUIRE(env->step(pddl::GroundAction{"down", {at, to}}).status == StepStatus::Applied);
        at = to;
    }
    REQUIRE(env->step(act("(right c50 c51)")).status == StepStatus::Applied);
    auto fb = env->step(act("(right c51 c52)"));
    CHECK(fb.status == StepStatus::EpisodeReset);
    CHECK(env->true_state() == env->task().problem.initial_state());
    CHECK(fb.observation.atoms == env->task().problem.initial_state());

    // a move that simply does not fit the grid is a no-op, not fatal
    CHECK(env->step(act("(up c00 c10)")).status == StepStatus::NoChange);
}

TEST_CASE("gridquest reference-style win") {
    auto env = make_environment(config("gridquest", "1"));
    env->reset();
    // to scissors at c24, then to the wraith at c52
    std::vector<const char*> route{"(right c00 c01)", "(right c01 c02)", "(right c02 c03)", "(down c03 c13)",
                                   "(down c13 c23)",  "(right c23 c24)", "(down c24 c34)",  "(left c34 c33)",
                                   "(left c33 c32)",  "(down c32 c42)",  "(down c42 c52)"};
    ExecutionFeedback fb;
    for (const char* a : route) {
        fb = env->step(act(a));
        REQUIRE(fb.status == StepStatus::Applied);
    }
    CHECK(env->true_state().contains(atom("has-scissors")));
    CHECK(fb.goal_reached);
}

TEST_CASE("stepwise check") {
    EnvConfig cfg = config("blocksworld", "1");
    auto env = make_environment(cfg);
    const auto& truth = env->task().domain;
    const auto& problem = env->task().problem;

    auto pre = env->reset();
    auto fb = env->step(act("(unstack orange green)"));
    CHECK(stepwise_check(pre, act("(unstack orange green)"), fb.observation, truth, problem) == Consistency::Consistent);
    pre = fb.observation;
    fb = env->step(act("(putdown orange)"));
    pre = fb.observation;
    fb = env->step(act("(pickup blue)"));
    CHECK(stepwise_check(pre, act("(pickup blue)"), fb.observation, truth, problem) == Consistency::Consistent);

    SUBCASE("believed-applicable action that did nothing") {
        pddl::Domain loose = truth;
        for (auto& a : loose.actions)
            if (a.name == "pickup") a.precondition = pddl::Condition::conj();
        auto p0 = env->reset();
        auto f = env->step(act("(pickup orange)"));
        REQUIRE(f.status == StepStatus::NoChange);
        CHECK(stepwise_check(p0, act("(pickup orange)"), f.observation, loose, problem) == Consistency::Mismatch);
        CHECK(stepwise_check(p0, act("(pickup orange)"), f.observation, truth, problem) == Consistency::Consistent);
    }
    SUBCASE("noisy stack lands elsewhere") {
        EnvConfig noisy = cfg;
        noisy.noise_probability = 1.0;
        auto nenv = make_environment(noisy);
        nenv->reset();
        // the only other place blue can go is the table
        auto p1 = nenv->step(act("(pickup blue)")).observation;
        auto f = nenv->step(act("(stack blue orange)"));
        REQUIRE(nenv->last_step_corrupted());
        CHECK(f.observation.atoms.contains(atom("on-table", {"blue"})));
        CHECK(stepwise_check(p1, act("(stack blue orange)"), f.observation, truth, problem) == Consistency::Mismatch);
    }
    CHECK_THROWS_AS(stepwise_check(pre, act("(fly blue)"), pre, truth, problem), pddl::PddlError);
}

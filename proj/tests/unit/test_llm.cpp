#include "support.hpp"

#include "induct/envs.hpp"
#include "induct/llm.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace induct;
using namespace induct::llm;

namespace {

EndpointConfig local_config() {
    EndpointConfig cfg;
    cfg.prompt_dir = test::data_dir() / "prompts";
    cfg.backoff_seconds = 0.0;
    cfg.credential_env = "INDUCT_TEST_KEY";
    return cfg;
}

std::shared_ptr<Client> scripted(std::vector<std::string> replies, std::shared_ptr<ScriptedTransport>* out = nullptr) {
    auto t = std::make_shared<ScriptedTransport>(std::move(replies));
    if (out) *out = t;
    return std::make_shared<Client>(t, local_config());
}

proposer::ProposerContext blocks_context() {
    auto task = envs::load_task("blocksworld", "1");
    proposer::ProposerContext ctx;
    ctx.domain = task.domain;
    ctx.skeleton = pddl::strip_semantics(task.domain);
    ctx.problem = task.problem;
    ctx.goal_text = task.goal_text;
    envs::Observation o0;
    o0.atoms = task.problem.initial_state();
    o0.known_objects = task.problem.objects;
    ctx.observations = {o0};
    return ctx;
}

// Fake chat endpoint; `fail_first` requests answer 503.
struct FakeEndpoint {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::string last_auth, last_body;
    int fail_first = 0;
    int status_after = 200;

    FakeEndpoint() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            int n = hits++;
            last_auth = req.get_header_value("Authorization");
            last_body = req.body;
            if (n < fail_first) {
                res.status = 503;
                return;
            }
            res.status = status_after;
            nlohmann::json j{{"choices", {{{"message", {{"role", "assistant"}, {"content", "(pickup blue)"}}}}}}};
            res.set_content(j.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeEndpoint() {
        server.stop();
        thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

}  // namespace

TEST_CASE("template rendering and configuration") {
    CHECK(render("a {x} b {y} {unknown}", {{"x", "1"}, {"y", "{x}"}}) == "a 1 b {x} {unknown}");
    auto cfg = local_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.templates["goal"] = "does-not-exist.txt";
    CHECK_THROWS_AS(cfg.validate(), LlmError);
    cfg = local_config();
    cfg.max_retries = -1;
    CHECK_THROWS_AS(cfg.validate(), LlmError);
}

TEST_CASE("trajectory parsing keeps valid actions only") {
    auto ctx = blocks_context();
    std::shared_ptr<ScriptedTransport> t;
    LlmSampler s(scripted({"Plan:\n1. (unstack orange green)\n2. (fly away)\n3. (putdown orange) ; done\n"
                           "4. (stack ghost blue)\n",
                           "I cannot help."},
                          &t));
    auto plan = s.sample_trajectory(ctx);
    REQUIRE(plan.size() == 2);
    CHECK(plan[0].str() == "(unstack orange green)");
    CHECK(plan[1].str() == "(putdown orange)");
    REQUIRE(t->requests().size() == 1);
    CHECK(t->requests()[0].temperature == doctest::Approx(0.7));
    CHECK(t->requests()[0].messages[0].content.find(ctx.goal_text) != std::string::npos);
    CHECK_THROWS_AS(s.sample_trajectory(ctx), proposer::ProposerError);
}

TEST_CASE("semantics parsing renames parameters and drops broken blocks") {
    auto ctx = blocks_context();
    const char* reply = R"(
(:action pickup :parameters (?x) :precondition (and (clear ?x) (on-table ?x) (arm-empty))
 :effect (and (holding ?x) (not (on-table ?x))))
(:action teleport :parameters (?x) :effect (holding ?x))
(:action putdown :parameters (?x) :precondition (and (holding ?x) (glowing ?x)) :effect (on-table ?x))
)";
    LlmSemantics g(scripted({reply}));
    auto sem = g.generate_semantics(ctx);
    CHECK(g.last_dropped().size() == 2);
    REQUIRE(sem.actions.count("pickup"));
    CHECK(pddl::print_condition(sem.actions["pickup"].precondition) == "(and (clear ?ob) (on-table ?ob) (arm-empty))");
    CHECK(pddl::print_condition(sem.actions["pickup"].effect) == "(and (holding ?ob) (not (on-table ?ob)))");
    // every skeleton action is present, unknown ones empty
    CHECK(sem.actions.size() == ctx.skeleton.actions.size());
    CHECK(belief::enumerate_paths("stack", belief::Kind::Pre, sem.actions["stack"].precondition).empty());
}

TEST_CASE("error prediction parsing") {
    auto ctx = blocks_context();
    ctx.actions = {pddl::parse_ground_action("(pickup orange)")};
    ctx.statuses = {envs::StepStatus::NoChange};
    ctx.observations.push_back(ctx.observations[0]);
    ctx.failure_index = 0;
    LlmErrorPredictor p(scripted({"unsatisfied_precondition at index 0: (on-table orange) is false; also (bogus x)",
                                  "unreached_goal"}));
    auto e = p.predict_error(ctx);
    CHECK(e.kind == proposer::PredictedError::Kind::UnsatisfiedPrecondition);
    CHECK(e.failing_action == 0u);
    REQUIRE(e.culprits.size() == 1);
    CHECK(pddl::print_condition(e.culprits[0]) == "(on-table orange)");
    auto g = p.predict_error(ctx);
    CHECK(g.kind == proposer::PredictedError::Kind::UnreachedGoal);
    CHECK(g.culprits.size() == 2);  // both goal conjuncts are unmet in o1
}

TEST_CASE("checker parsing") {
    auto ctx = blocks_context();
    LlmChecker c(scripted({"NO_EDIT", "object red - block\nobject blob - nonsense\nadd (on-table red)\nadd (clear red)\nadd (on red ghost)\n"
                                      "remove (arm-empty)\n"}));
    CHECK_FALSE(c.check_problem(ctx));
    auto e = c.check_problem(ctx);
    REQUIRE(e);
    CHECK(e->objects_to_add.size() == 1);
    CHECK(e->atoms_to_add.size() == 2);
    CHECK(e->atoms_to_remove.size() == 1);
}

TEST_CASE("goal proposer uses retrieved exemplars") {
    Retriever r(test::data_dir() / "retrieval" / "goals.jsonl");
    CHECK(r.size() >= 2);
    auto task = envs::load_task("blocksworld", "1");
    auto top = r.top(task.goal_text, 2);
    REQUIRE(top.size() == 2);
    CHECK(Retriever::token_f1(task.goal_text, top[0].instruction) >=
          Retriever::token_f1(task.goal_text, top[1].instruction));

    std::shared_ptr<ScriptedTransport> t;
    LlmGoalProposer g(scripted({"Goal: (and (on yellow orange) (on green blue))"}, &t), r);
    auto goal = g.propose_goal(task.goal_text, task.problem, pddl::strip_semantics(task.domain));
    CHECK(goal == task.problem.goal);
    CHECK(t->requests()[0].messages[0].content.find(top[0].goal) != std::string::npos);
    CHECK(t->requests()[0].temperature == doctest::Approx(0.0));
}

TEST_CASE("retriever ranks by token overlap") {
    Retriever r(std::vector<Exemplar>{{"stack red on blue", "a"}, {"defeat the golem", "b"}, {"put red on the table", "c"}});
    auto top = r.top("put red on blue", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].goal == "a");
    CHECK(top[1].goal == "c");
    CHECK(Retriever::token_f1("a b", "a b") == doctest::Approx(1.0));
    CHECK(Retriever::token_f1("a b", "c") == 0.0);
    CHECK(r.top("x", 10).size() == 3);
}

TEST_CASE("http transport against a local endpoint") {
    FakeEndpoint ep;
    auto cfg = local_config();
    cfg.base_url = ep.url();
    cfg.model = "test-model";
    setenv("INDUCT_TEST_KEY", "sk-local", 1);

    SUBCASE("request shape and credential header") {
        HttpTransport t(cfg);
        Request req{"test-model", {{"user", "hello"}}, 0.25};
        CHECK(t.complete(req) == "(pickup blue)");
        CHECK(ep.last_auth == "Bearer sk-local");
        auto body = nlohmann::json::parse(ep.last_body);
        CHECK(body["model"] == "test-model");
        CHECK(body["temperature"].get<double>() == doctest::Approx(0.25));
        CHECK(body["messages"][0]["content"] == "hello");
    }
    SUBCASE("transient failures are retried") {
        ep.fail_first = 2;
        std::vector<Exchange> seen;
        Client c(std::make_shared<HttpTransport>(cfg), cfg, [&](const Exchange& e) { seen.push_back(e); });
        CHECK(c.ask("trajectory", {}, 0.7) == "(pickup blue)");
        CHECK(ep.hits == 3);
        REQUIRE(seen.size() == 1);
        CHECK(seen[0].attempts == 3);
    }
    SUBCASE("retries are bounded") {
        ep.fail_first = 100;
        cfg.max_retries = 2;
        Client c(std::make_shared<HttpTransport>(cfg), cfg);
        CHECK_THROWS_AS(c.ask("trajectory", {}, 0.7), TransportError);
        CHECK(ep.hits == 3);
    }
    SUBCASE("client errors are not retried") {
        ep.status_after = 401;
        Client c(std::make_shared<HttpTransport>(cfg), cfg);
        try {
            c.ask("trajectory", {}, 0.7);
            FAIL("expected a transport error");
        } catch (const TransportError& e) {
            CHECK_FALSE(e.retryable());
        }
        CHECK(ep.hits == 1);
    }
    SUBCASE("missing credential") {
        unsetenv("INDUCT_TEST_KEY");
        HttpTransport t(cfg);
        CHECK_THROWS_AS(t.complete({"m", {{"user", "x"}}, 0}), TransportError);
        CHECK(ep.hits == 0);
    }
    unsetenv("INDUCT_TEST_KEY");
}

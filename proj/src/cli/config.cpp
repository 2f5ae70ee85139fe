#include "induct/cli.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace induct::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Rejects keys a section does not know, so typos do not pass silently.
void only_keys(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError("'" + section + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + section);
}

template <class T>
void read(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, fs::path& into, const fs::path& base) {
    if (!j.contains(key)) return;
    fs::path p = j.at(key).get<std::string>();
    into = p.empty() || p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string search_name(planner::SearchMode m) { return m == planner::SearchMode::BreadthFirst ? "bfs" : "gbfs"; }

planner::SearchMode parse_search(const std::string& s) {
    if (s == "bfs") return planner::SearchMode::BreadthFirst;
    if (s == "gbfs") return planner::SearchMode::GreedyBestFirst;
    throw ConfigError("unknown planner search '" + s + "' (expected gbfs or bfs)");
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    RunConfig cfg;
    try {
        json j = json::parse(json_text);
        only_keys(j, "config", {"env", "loop", "proposers", "llm", "seeds", "out"});
        if (j.contains("env")) {
            const auto& e = j["env"];
            only_keys(e, "env", {"name", "tasks", "observability", "noise_probability", "data_dir"});
            read(e, "name", cfg.env);
            read(e, "tasks", cfg.tasks);
            read(e, "noise_probability", cfg.noise_probability);
            read_path(e, "data_dir", cfg.data_dir, base_dir);
            if (e.contains("observability")) {
                auto o = e["observability"].get<std::string>();
                if (o == "full") cfg.observability = envs::Observability::Full;
                else if (o == "partial") cfg.observability = envs::Observability::Partial;
                else throw ConfigError("observability must be full or partial, not '" + o + "'");
            }
        }
        if (j.contains("loop")) {
            const auto& l = j["loop"];
            only_keys(l, "loop", {"prospection_k", "alpha", "beta", "max_resets", "max_executed_steps", "max_iterations",
                                  "mode", "stepwise_detector", "retrieval_corpus", "planner"});
            read(l, "prospection_k", cfg.loop.prospection_k);
            read(l, "alpha", cfg.loop.belief.alpha);
            read(l, "beta", cfg.loop.belief.beta);
            read(l, "max_resets", cfg.loop.max_resets);
            read(l, "max_executed_steps", cfg.loop.max_executed_steps);
            read(l, "max_iterations", cfg.loop.max_iterations);
            read(l, "stepwise_detector", cfg.loop.stepwise_detector);
            read_path(l, "retrieval_corpus", cfg.loop.retrieval_corpus, base_dir);
            if (l.contains("mode")) cfg.loop.mode = orchestrator::parse_mode(l["mode"].get<std::string>());
            if (l.contains("planner")) {
                const auto& p = l["planner"];
                only_keys(p, "loop.planner", {"time_budget_seconds", "node_budget", "search"});
                if (p.contains("time_budget_seconds"))
                    cfg.loop.planner.time_budget = std::chrono::duration<double>(p["time_budget_seconds"].get<double>());
                read(p, "node_budget", cfg.loop.planner.node_budget);
                if (p.contains("search")) cfg.loop.planner.search_mode = parse_search(p["search"].get<std::string>());
            }
        }
        if (j.contains("proposers")) {
            const auto& p = j["proposers"];
            only_keys(p, "proposers", {"all", "sampler", "semantics", "error", "checker", "goal", "oracle_noise"});
            if (p.contains("all")) cfg.proposers.set_all(p["all"].get<std::string>());
            read(p, "sampler", cfg.proposers.sampler);
            read(p, "semantics", cfg.proposers.semantics);
            read(p, "error", cfg.proposers.error);
            read(p, "checker", cfg.proposers.checker);
            read(p, "goal", cfg.proposers.goal);
            read(p, "oracle_noise", cfg.proposers.oracle_noise);
        }
        if (j.contains("llm")) {
            const auto& l = j["llm"];
            only_keys(l, "llm", {"base_url", "model", "credential_env", "sampling_temperature", "analysis_temperature",
                                 "max_retries", "backoff_seconds", "timeout_seconds", "prompt_dir", "templates"});
            read(l, "base_url", cfg.llm.base_url);
            read(l, "model", cfg.llm.model);
            read(l, "credential_env", cfg.llm.credential_env);
            read(l, "sampling_temperature", cfg.llm.sampling_temperature);
            read(l, "analysis_temperature", cfg.llm.analysis_temperature);
            read(l, "max_retries", cfg.llm.max_retries);
            read(l, "backoff_seconds", cfg.llm.backoff_seconds);
            read(l, "timeout_seconds", cfg.llm.timeout_seconds);
            read_path(l, "prompt_dir", cfg.llm.prompt_dir, base_dir);
            read(l, "templates", cfg.llm.templates);
        }
        read(j, "seeds", cfg.seeds);
        read_path(j, "out", cfg.out_dir, base_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const orchestrator::LoopError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::absolute(file).parent_path());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seeds = {*o.seed};
    if (o.env) cfg.env = *o.env;
    if (o.task) cfg.tasks = {*o.task};
    if (o.proposer) cfg.proposers.set_all(*o.proposer);
    if (o.out) cfg.out_dir = *o.out;
}

void RunConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (tasks.empty()) throw ConfigError("tasks must not be empty");
    if (noise_probability < 0.0 || noise_probability > 1.0) throw ConfigError("noise_probability must be in [0, 1]");
    try {
        loop.validate();
        proposers.validate();
        if (proposers.uses_llm()) {
            endpoint().validate();
            if (llm.base_url.rfind("https://", 0) != 0 && llm.base_url.rfind("http://", 0) != 0)
                throw ConfigError("llm.base_url must be an http(s) URL");
            const char* key = std::getenv(llm.credential_env.c_str());
            if (!key || !*key) throw ConfigError("environment variable " + llm.credential_env + " is not set");
        }
        // building the env also catches unsupported observability
        for (const auto& t : tasks) envs::make_environment(env_config(t, seeds.front()));
    } catch (const orchestrator::LoopError& e) {
        throw ConfigError(e.what());
    } catch (const belief::BeliefError& e) {
        throw ConfigError(e.what());
    } catch (const llm::LlmError& e) {
        throw ConfigError(e.what());
    } catch (const envs::EnvError& e) {
        throw ConfigError(e.what());
    }
}

llm::EndpointConfig RunConfig::endpoint() const {
    auto e = llm;
    if (e.prompt_dir.empty()) e.prompt_dir = data_dir / "prompts";
    return e;
}

envs::EnvConfig RunConfig::env_config(const std::string& task, std::uint64_t seed) const {
    envs::EnvConfig e;
    e.env = env;
    e.task = task;
    e.observability = observability;
    e.noise_probability = noise_probability;
    e.seed = seed;
    e.data_dir = data_dir;
    return e;
}

orchestrator::LoopConfig RunConfig::loop_config(std::uint64_t seed) const {
    auto l = loop;
    l.seed = seed;
    l.belief.seed = seed;
    return l;
}

std::string RunConfig::to_json(const std::optional<std::string>& task, std::optional<std::uint64_t> seed) const {
    json j;
    j["env"] = {{"name", env},
                {"tasks", task ? std::vector<std::string>{*task} : tasks},
                {"observability", observability == envs::Observability::Full ? "full" : "partial"},
                {"noise_probability", noise_probability},
                {"data_dir", data_dir.string()}};
    j["loop"] = {{"prospection_k", loop.prospection_k},
                 {"alpha", loop.belief.alpha},
                 {"beta", loop.belief.beta},
                 {"max_resets", loop.max_resets},
                 {"max_executed_steps", loop.max_executed_steps},
                 {"max_iterations", loop.max_iterations},
                 {"mode", orchestrator::to_string(loop.mode)},
                 {"stepwise_detector", loop.stepwise_detector},
                 {"retrieval_corpus", loop.retrieval_corpus.string()},
                 {"planner", {{"time_budget_seconds", loop.planner.time_budget.count()},
                              {"node_budget", loop.planner.node_budget},
                              {"search", search_name(loop.planner.search_mode)}}}};
    j["proposers"] = {{"sampler", proposers.sampler},     {"semantics", proposers.semantics},
                      {"error", proposers.error},         {"checker", proposers.checker},
                      {"goal", proposers.goal},           {"oracle_noise", proposers.oracle_noise}};
    // the credential itself never appears here, only the variable's name
    j["llm"] = {{"base_url", llm.base_url},
                {"model", llm.model},
                {"credential_env", llm.credential_env},
                {"sampling_temperature", llm.sampling_temperature},
                {"analysis_temperature", llm.analysis_temperature},
                {"max_retries", llm.max_retries},
                {"backoff_seconds", llm.backoff_seconds},
                {"timeout_seconds", llm.timeout_seconds},
                {"prompt_dir", endpoint().prompt_dir.string()},
                {"templates", llm.templates}};
    j["seeds"] = seed ? std::vector<std::uint64_t>{*seed} : seeds;
    j["out"] = fs::absolute(out_dir).lexically_normal().string();
    return j.dump();
}

std::string metrics_json(const std::vector<eval::Metrics>& rows) {
    json a = json::array();
    for (const auto& m : rows) {
        json per_action = json::object();
        for (const auto& [name, s] : m.f1.per_action)
            per_action[name] = {{"predicted", s.predicted}, {"truth", s.truth}, {"common", s.common}, {"f1", s.f1}};
        json series = json::array();
        for (const auto& p : m.series) series.push_back({{"iteration", p.iteration}, {"leaves", p.leaves}, {"f1", p.f1}});
        a.push_back({{"env", m.env},
                     {"task", m.task},
                     {"seed", m.seed},
                     {"f1", m.f1.f1},
                     {"precision", m.f1.precision},
                     {"recall", m.f1.recall},
                     {"precision_as_written", m.f1.precision_as_written},
                     {"recall_as_written", m.f1.recall_as_written},
                     {"per_action", per_action},
                     {"missing", m.f1.missing},
                     {"spurious", m.f1.spurious},
                     {"resets", m.resets},
                     {"steps", m.executed_steps},
                     {"iterations", m.iterations},
                     {"success", m.success},
                     {"termination", m.termination},
                     {"goal_fraction", m.goal_fraction},
                     {"belief_series", series}});
    }
    return a.dump(2);
}

}  // namespace induct::cli

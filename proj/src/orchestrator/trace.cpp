#include "induct/orchestrator.hpp"

#include <json.hpp>

#include <sstream>

namespace induct::orchestrator {

using nlohmann::json;

namespace {

json actions_json(const std::vector<pddl::GroundAction>& plan) {
    json a = json::array();
    for (const auto& x : plan) a.push_back(x.str());
    return a;
}

json atoms_json(const std::set<pddl::Atom>& atoms) {
    json a = json::array();
    for (const auto& x : atoms) a.push_back(x.str());
    return a;
}

json objects_json(const std::vector<pddl::TypedName>& objs) {
    json a = json::array();
    for (const auto& o : objs) a.push_back(o.name + " - " + o.type);
    return a;
}

std::vector<pddl::GroundAction> actions_from(const json& j) {
    std::vector<pddl::GroundAction> out;
    for (const auto& x : j) out.push_back(pddl::parse_ground_action(x.get<std::string>()));
    return out;
}

// Atoms share the ground action syntax; no domain is needed to read them back.
pddl::Atom atom_from(const std::string& s) {
    auto g = pddl::parse_ground_action(s);
    return pddl::Atom{g.name, g.args};
}

envs::StepStatus status_from(const std::string& s) {
    for (auto st : {envs::StepStatus::Applied, envs::StepStatus::NoChange, envs::StepStatus::EpisodeReset})
        if (envs::to_string(st) == s) return st;
    throw TraceError("unknown step status '" + s + "'");
}

}  // namespace

void Trace::emit(std::string line) {
    if (out_) {
        *out_ << line << '\n';
        out_->flush();
    }
    lines_.push_back(std::move(line));
}

std::string Trace::text() const {
    std::string s;
    for (const auto& l : lines_) s += l + '\n';
    return s;
}

void Trace::header(const std::string& config_json, const std::string& env, const std::string& task,
                   std::uint64_t seed) {
    json j{{"type", "header"}, {"schema", schema}, {"env", env}, {"task", task}, {"seed", seed}};
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    emit(j.dump());
}

void Trace::init(const pddl::Problem& problem, const std::string& goal_text) {
    emit(json{{"type", "init"}, {"goal_text", goal_text}, {"problem", pddl::print_problem(problem)}}.dump());
}

void Trace::iteration(std::size_t index, std::size_t resets, std::size_t steps, const pddl::Problem& problem,
                      const pddl::Domain& sampled, const planner::PlanResult& plan, const std::string& source,
                      const std::vector<pddl::GroundAction>& sampled_trajectory,
                      const std::optional<std::vector<pddl::GroundAction>>& executed) {
    json j{{"type", "iteration"},
           {"index", index},
           {"resets", resets},
           {"steps", steps},
           {"problem", pddl::print_problem(problem)},
           {"sampled_domain", pddl::print_domain(sampled)},
           {"planner", {{"status", planner::to_string(plan.status)},
                        {"plan", actions_json(plan.plan)},
                        {"satisfied", plan.satisfied_goal_conjuncts}}},
           {"source", source},
           {"sampled", actions_json(sampled_trajectory)}};
    j["trajectory"] = executed ? actions_json(*executed) : json(nullptr);
    emit(j.dump());
}

void Trace::step(std::size_t iteration, std::size_t index, const pddl::GroundAction& action,
                 const envs::ExecutionFeedback& fb, bool mismatch, std::size_t steps) {
    emit(json{{"type", "step"},
              {"iteration", iteration},
              {"index", index},
              {"action", action.str()},
              {"status", envs::to_string(fb.status)},
              {"observation", atoms_json(fb.observation.atoms.atoms)},
              {"known_objects", objects_json(fb.observation.known_objects)},
              {"goal_reached", fb.goal_reached},
              {"mismatch", mismatch},
              {"steps", steps}}
             .dump());
}

void Trace::reset(std::size_t resets, const std::string& cause) {
    emit(json{{"type", "reset"}, {"resets", resets}, {"cause", cause}}.dump());
}

void Trace::edit(std::size_t iteration, const proposer::ProblemEdit& edit, bool accepted, const std::string& note) {
    json j{{"type", "edit"},
           {"iteration", iteration},
           {"accepted", accepted},
           {"add", atoms_json(edit.atoms_to_add)},
           {"remove", atoms_json(edit.atoms_to_remove)},
           {"objects", objects_json(edit.objects_to_add)}};
    if (!note.empty()) j["note"] = note;
    emit(j.dump());
}

void Trace::error(std::size_t iteration, const proposer::PredictedError& e) {
    json culprits = json::array();
    for (const auto& c : e.culprits) culprits.push_back(pddl::print_condition(c));
    json j{{"type", "error"},
           {"iteration", iteration},
           {"kind", proposer::to_string(e.kind)},
           {"culprits", culprits},
           {"explanation", e.explanation}};
    j["failing_action"] = e.failing_action ? json(*e.failing_action) : json(nullptr);
    emit(j.dump());
}

void Trace::semantics(std::size_t iteration, const belief::ProposedSemantics& s) {
    json actions = json::object();
    for (const auto& [name, sem] : s.actions)
        actions[name] = {{"precondition", pddl::print_condition(sem.precondition)},
                         {"effect", pddl::print_condition(sem.effect)}};
    emit(json{{"type", "semantics"}, {"iteration", iteration}, {"actions", actions}}.dump());
}

void Trace::belief(std::size_t iteration, const belief::Memory& m) {
    emit(json{{"type", "belief"}, {"iteration", iteration}, {"memory", m.serialize()}}.dump());
}

void Trace::success_check(std::size_t iteration, const planner::PlanResult& plan) {
    emit(json{{"type", "success_check"},
              {"iteration", iteration},
              {"status", planner::to_string(plan.status)},
              {"plan", actions_json(plan.plan)}}
             .dump());
}

void Trace::proposer_failure(std::size_t iteration, const std::string& role, const std::string& message) {
    emit(json{{"type", "proposer_failure"}, {"iteration", iteration}, {"role", role}, {"message", message}}.dump());
}

void Trace::llm(const llm::Exchange& ex) {
    json messages = json::array();
    for (const auto& m : ex.request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    emit(json{{"type", "llm"},
              {"role", ex.role},
              {"model", ex.request.model},
              {"temperature", ex.request.temperature},
              {"messages", messages},
              {"response", ex.response},
              {"attempts", ex.attempts}}
             .dump());
}

void Trace::final(const RunReport& r) {
    emit(json{{"type", "final"},
              {"success", r.success},
              {"termination", r.termination},
              {"resets", r.resets},
              {"steps", r.executed_steps},
              {"iterations", r.iterations},
              {"goal_fraction", r.goal_fraction},
              {"memory", r.memory.serialize()},
              {"best_domain", pddl::print_domain(r.best_domain)}}
             .dump());
}

ParsedTrace read_trace(const std::string& text) {
    ParsedTrace t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (!have_header) {
                if (type != "header") throw TraceError("trace does not start with a header");
                const auto schema = j.at("schema").get<std::string>();
                if (schema != Trace::schema) throw TraceError("unsupported trace schema '" + schema + "'");
                t.config_json = j.at("config").dump();
                t.env = j.at("env").get<std::string>();
                t.task = j.at("task").get<std::string>();
                t.seed = j.at("seed").get<std::uint64_t>();
                have_header = true;
                continue;
            }
            if (t.final) throw TraceError("records after the final record");
            if (type == "step") {
                TraceStep s;
                s.iteration = j.at("iteration").get<std::size_t>();
                s.index = j.at("index").get<std::size_t>();
                s.action = pddl::parse_ground_action(j.at("action").get<std::string>());
                s.status = status_from(j.at("status").get<std::string>());
                for (const auto& a : j.at("observation")) s.observation.atoms.atoms.insert(atom_from(a.get<std::string>()));
                for (const auto& o : j.at("known_objects")) {
                    auto str = o.get<std::string>();
                    auto dash = str.find(" - ");
                    if (dash == std::string::npos) throw TraceError("bad object entry '" + str + "'");
                    s.observation.known_objects.push_back({str.substr(0, dash), str.substr(dash + 3)});
                }
                s.mismatch = j.at("mismatch").get<bool>();
                s.steps = j.at("steps").get<std::size_t>();
                t.events.emplace_back(std::move(s));
            } else if (type == "reset") {
                t.events.emplace_back(TraceReset{j.at("resets").get<std::size_t>(), j.at("cause").get<std::string>()});
            } else if (type == "iteration") {
                TraceIteration it;
                it.index = j.at("index").get<std::size_t>();
                it.problem = j.at("problem").get<std::string>();
                it.domain = j.at("sampled_domain").get<std::string>();
                it.source = j.at("source").get<std::string>();
                if (!j.at("trajectory").is_null()) it.executed = actions_from(j.at("trajectory"));
                t.iterations.push_back(std::move(it));
            } else if (type == "belief") {
                t.beliefs.emplace_back(j.at("iteration").get<std::size_t>(), j.at("memory").get<std::string>());
            } else if (type == "edit") {
                if (j.at("accepted").get<bool>()) t.accepted_edits.push_back(j.at("iteration").get<std::size_t>());
            } else if (type == "llm") {
                ++t.llm_exchanges;
            } else if (type == "final") {
                TraceFinal f;
                f.success = j.at("success").get<bool>();
                f.termination = j.at("termination").get<std::string>();
                f.resets = j.at("resets").get<std::size_t>();
                f.executed_steps = j.at("steps").get<std::size_t>();
                f.iterations = j.at("iterations").get<std::size_t>();
                f.goal_fraction = j.at("goal_fraction").get<double>();
                f.memory = j.at("memory").get<std::string>();
                t.final = std::move(f);
            } else if (type != "init" && type != "error" && type != "semantics" && type != "success_check" &&
                       type != "proposer_failure") {
                throw TraceError("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const pddl::PddlError& e) {
            throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_header) throw TraceError("empty trace");
    return t;
}

}  // namespace induct::orchestrator

#include "induct/envs.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace induct::envs {

namespace {

using nlohmann::json;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw EnvError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<pddl::GroundAction> read_plan(const json& arr) {
    std::vector<pddl::GroundAction> plan;
    for (const auto& s : arr) plan.push_back(pddl::parse_ground_action(s.get<std::string>()));
    return plan;
}

// Grid layout -> problem text. Rows are numbered top to bottom, so "up" goes to row-1.
std::string grid_problem(const json& j) {
    auto layout = j.at("layout").get<std::vector<std::string>>();
    auto legend = j.at("legend").get<std::map<std::string, std::string>>();
    std::ostringstream objects, init;
    const int rows = static_cast<int>(layout.size());
    // cell names carry one digit per coordinate
    if (rows == 0 || rows > 10 || layout[0].empty() || layout[0].size() > 10) throw EnvError("grid must be 1x1 to 10x10");
    for (int r = 0; r < rows; ++r) {
        const int cols = static_cast<int>(layout[r].size());
        if (r > 0 && cols != static_cast<int>(layout[0].size())) throw EnvError("ragged grid layout");
        for (int c = 0; c < cols; ++c) {
            const std::string cell = cell_name(r, c);
            objects << ' ' << cell;
            if (r > 0) init << " (north " << cell << ' ' << cell_name(r - 1, c) << ')';
            if (r + 1 < rows) init << " (south " << cell << ' ' << cell_name(r + 1, c) << ')';
            if (c > 0) init << " (west " << cell << ' ' << cell_name(r, c - 1) << ')';
            if (c + 1 < cols) init << " (east " << cell << ' ' << cell_name(r, c + 1) << ')';
            char ch = layout[r][c];
            if (ch == '.') continue;
            auto it = legend.find(std::string(1, ch));
            if (it == legend.end()) throw EnvError(std::string("grid symbol '") + ch + "' missing from legend");
            if (it->second == "agent") init << " (agent-at " << cell << ')';
            else init << " (" << it->second << "-at " << cell << ')';
        }
    }
    std::ostringstream out;
    out << "(define (problem " << j.value("env", "gridquest") << '-' << j.at("id").get<std::string>() << ")"
        << " (:domain gridquest) (:objects" << objects.str() << " - cell) (:init" << init.str() << ")"
        << " (:goal " << j.at("goal").get<std::string>() << "))";
    return out.str();
}

std::string listed_problem(const json& j, const std::string& domain_name) {
    std::ostringstream out;
    out << "(define (problem " << j.value("env", "task") << '-' << j.at("id").get<std::string>() << ") (:domain "
        << domain_name << ") (:objects";
    for (const auto& o : j.at("objects")) out << ' ' << o.get<std::string>();
    out << ") (:init";
    for (const auto& a : j.at("init")) out << ' ' << a.get<std::string>();
    out << ") (:goal " << j.at("goal").get<std::string>() << "))";
    return out.str();
}

}  // namespace

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("INDUCT_DATA_DIR"); env && *env) return env;
    return INDUCT_DATA_DIR;
}

std::string cell_name(int row, int col) { return "c" + std::to_string(row) + std::to_string(col); }

Task load_task(const std::string& env, const std::string& id, const std::filesystem::path& data_dir) {
    const auto path = data_dir / "tasks" / (env + "-" + id + ".json");
    if (!std::filesystem::exists(path)) throw EnvError("unknown task '" + env + "/" + id + "'");
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw EnvError(path.string() + ": " + e.what());
    }
    Task t;
    try {
        t.env = j.at("env").get<std::string>();
        t.id = j.at("id").get<std::string>();
        t.domain = pddl::parse_domain(slurp(data_dir / "domains" / j.at("domain").get<std::string>()));
        std::string problem_text = j.contains("layout") ? grid_problem(j) : listed_problem(j, t.domain.name);
        t.problem = pddl::parse_problem(problem_text, t.domain);
        t.goal_text = j.value("goal_text", "");
        t.rules_text = j.value("rules_text", "");
        t.visibility_radius = j.value("visibility_radius", 1);
        if (j.contains("reference_plan")) t.reference_plan = read_plan(j["reference_plan"]);
        if (j.contains("alternative_plans"))
            for (const auto& p : j["alternative_plans"]) t.alternative_plans.push_back(read_plan(p));
    } catch (const json::exception& e) {
        throw EnvError(path.string() + ": " + e.what());
    } catch (const pddl::PddlError& e) {
        throw EnvError(path.string() + ": " + e.what());
    }
    if (t.env != env) throw EnvError(path.string() + ": task is for env '" + t.env + "'");
    return t;
}

}  // namespace induct::envs

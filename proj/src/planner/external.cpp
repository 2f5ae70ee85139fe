#include "induct/planner.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace induct::planner {

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

std::string shell_quote(const std::string& s) {
    return "'" + replace_all(s, "'", "'\\''") + "'";
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    if (!out) throw ExternalPlannerError(ExternalPlannerError::Kind::ProcessFailure, "cannot write " + p.string());
    out << content;
}

}  // namespace

ExternalPlanner::ExternalPlanner(ExternalPlannerConfig cfg) : cfg_(std::move(cfg)) {}

PlanResult ExternalPlanner::plan(const pddl::Domain& domain, const pddl::Problem& problem) {
    std::lock_guard lock(mutex_);
    namespace fs = std::filesystem;
    fs::create_directories(cfg_.working_directory);
    const fs::path domain_path = cfg_.working_directory / "domain.pddl";
    const fs::path problem_path = cfg_.working_directory / "problem.pddl";
    const fs::path plan_path = cfg_.working_directory / "plan.txt";
    fs::remove(plan_path);
    write_file(domain_path, pddl::print_domain(domain));
    write_file(problem_path, pddl::print_problem(problem));

    std::string cmd = cfg_.command_template;
    cmd = replace_all(cmd, "{domain}", shell_quote(domain_path.string()));
    cmd = replace_all(cmd, "{problem}", shell_quote(problem_path.string()));
    cmd = replace_all(cmd, "{plan}", shell_quote(plan_path.string()));
    int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw ExternalPlannerError(ExternalPlannerError::Kind::ProcessFailure,
                                   "external planner failed (status " + std::to_string(status) + "): " + cmd);
    }
    std::ifstream in(plan_path);
    if (!in) {
        throw ExternalPlannerError(ExternalPlannerError::Kind::ProcessFailure, "external planner wrote no plan file");
    }
    std::stringstream buf;
    buf << in.rdbuf();

    std::vector<pddl::GroundAction> steps;
    try {
        steps = parse_plan(buf.str());
    } catch (const pddl::PddlError& e) {
        throw ExternalPlannerError(ExternalPlannerError::Kind::UnparseablePlan, std::string("unparseable plan: ") + e.what());
    }
    Validation v;
    try {
        v = validate_plan(domain, problem, steps);
    } catch (const pddl::PddlError& e) {
        throw ExternalPlannerError(ExternalPlannerError::Kind::ValidationFailure, std::string("invalid plan: ") + e.what());
    }
    if (!v.valid) {
        throw ExternalPlannerError(ExternalPlannerError::Kind::ValidationFailure,
                                   "external plan fails validation at step " + std::to_string(v.failing_index));
    }
    PlanResult r;
    r.status = PlanResult::Status::Complete;
    r.plan = std::move(steps);
    r.satisfied_goal_conjuncts = pddl::goal_conjuncts(problem.goal).size();
    return r;
}

PlanResult external_plan(const pddl::Domain& domain, const pddl::Problem& problem, const ExternalPlannerConfig& cfg) {
    ExternalPlanner planner(cfg);
    return planner.plan(domain, problem);
}

}  // namespace induct::planner

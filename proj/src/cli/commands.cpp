#include "induct/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace induct::cli {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

// The run configuration recorded in a trace header, pointed at the recorded run.
RunConfig recorded_config(const orchestrator::ParsedTrace& t) {
    RunConfig cfg = parse_config(t.config_json, fs::current_path());
    cfg.env = t.env;
    cfg.tasks = {t.task};
    cfg.seeds = {t.seed};
    return cfg;
}

std::string describe(const envs::Observation& o) {
    std::string s;
    for (const auto& a : o.atoms.atoms) s += " " + a.str();
    return s;
}

}  // namespace

std::string trace_name(const std::string& env, const std::string& task, std::uint64_t seed) {
    return env + "-" + task + "-seed" + std::to_string(seed) + ".trace.jsonl";
}

ReplayResult replay(const std::string& trace_text) {
    ReplayResult r;
    orchestrator::ParsedTrace t;
    RunConfig cfg;
    try {
        t = orchestrator::read_trace(trace_text);
        cfg = recorded_config(t);
    } catch (const std::exception& e) {
        r.message = std::string("unreadable trace: ") + e.what();
        return r;
    }
    auto env = envs::make_environment(cfg.env_config(t.task, t.seed));
    env->reset();
    for (const auto& e : t.events) {
        if (const auto* reset = std::get_if<orchestrator::TraceReset>(&e)) {
            // fatal resets happen inside the step that caused them
            if (reset->cause == "iteration") env->reset();
            continue;
        }
        const auto& s = std::get<orchestrator::TraceStep>(e);
        const std::size_t at = r.steps_checked;
        auto where = "step " + std::to_string(at) + " (iteration " + std::to_string(s.iteration) + ", position " +
                     std::to_string(s.index) + ", " + s.action.str() + ")";
        envs::ExecutionFeedback fb;
        try {
            fb = env->step(s.action);
        } catch (const envs::EnvError& ex) {
            r.divergence = at;
            r.message = "divergence at " + where + ": " + ex.what();
            return r;
        }
        if (fb.status != s.status) {
            r.divergence = at;
            r.message = "divergence at " + where + ": status " + envs::to_string(fb.status) + ", recorded " +
                        envs::to_string(s.status);
            return r;
        }
        if (!(fb.observation == s.observation)) {
            r.divergence = at;
            r.message = "divergence at " + where + ": observed" + describe(fb.observation) + "; recorded" +
                        describe(s.observation);
            return r;
        }
        ++r.steps_checked;
    }
    r.ok = true;
    r.message = "replayed " + std::to_string(r.steps_checked) + " steps without divergence";
    return r;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return exit_code::bad_config;
    }
    try {
        fs::create_directories(cfg.out_dir);
    } catch (const fs::filesystem_error& e) {
        err << e.what() << '\n';
        return exit_code::failure;
    }

    std::vector<eval::Metrics> rows;
    bool failed = false;
    for (const auto& task : cfg.tasks) {
        for (auto seed : cfg.seeds) {
            const fs::path trace_path = cfg.out_dir / trace_name(cfg.env, task, seed);
            try {
                auto env = envs::make_environment(cfg.env_config(task, seed));
                std::ofstream file(trace_path);
                if (!file) throw std::runtime_error("cannot write " + trace_path.string());
                orchestrator::Trace trace(&file);
                trace.header(cfg.to_json(task, seed), cfg.env, task, seed);
                auto proposers = orchestrator::make_proposers(cfg.proposers, env->task(), seed, cfg.endpoint(),
                                                              cfg.loop.retrieval_corpus, &trace);
                orchestrator::Loop loop(cfg.loop_config(seed), *env, proposers, &trace);
                auto report = loop.run();
                auto m = eval::summarize(trace.text(), env->task().domain);
                out << cfg.env << " task " << task << " seed " << seed << ": "
                    << (report.success ? "success" : "no success") << " (" << report.termination << "), F1 "
                    << m.f1.f1 << ", resets " << report.resets << ", steps " << report.executed_steps << " -> "
                    << trace_path.string() << '\n';
                rows.push_back(std::move(m));
            } catch (const std::exception& e) {
                err << cfg.env << " task " << task << " seed " << seed << " failed: " << e.what() << '\n';
                failed = true;
            }
        }
    }
    try {
        write_file(cfg.out_dir / "summary.json", metrics_json(rows) + "\n");
        write_file(cfg.out_dir / "summary.tsv", eval::to_table(rows));
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::failure;
    }
    return failed ? exit_code::failure : exit_code::ok;
}

int cmd_replay(const fs::path& trace, std::ostream& out, std::ostream& err) {
    std::string text;
    try {
        text = slurp(trace);
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::failure;
    }
    auto r = replay(text);
    (r.ok ? out : err) << r.message << '\n';
    return r.ok ? exit_code::ok : exit_code::failure;
}

int cmd_eval(const std::vector<fs::path>& traces, const std::optional<fs::path>& table, std::ostream& out,
             std::ostream& err) {
    std::vector<eval::Metrics> rows;
    bool failed = false;
    for (const auto& p : traces) {
        try {
            auto t = orchestrator::read_trace(slurp(p));
            auto cfg = recorded_config(t);
            auto truth = envs::load_task(t.env, t.task, cfg.data_dir).domain;
            rows.push_back(eval::summarize(t, truth));
        } catch (const std::exception& e) {
            err << p.string() << ": " << e.what() << '\n';
            failed = true;
        }
    }
    auto text = eval::to_table(rows);
    out << text;
    if (table) {
        try {
            write_file(*table, text);
        } catch (const std::exception& e) {
            err << e.what() << '\n';
            return exit_code::failure;
        }
    }
    return failed ? exit_code::failure : exit_code::ok;
}

int cmd_print_domain(const fs::path& trace, double threshold, std::ostream& out, std::ostream& err) {
    try {
        auto t = orchestrator::read_trace(slurp(trace));
        if (!t.final) throw std::runtime_error("truncated trace: no final record");
        auto cfg = recorded_config(t);
        auto skeleton = pddl::strip_semantics(envs::load_task(t.env, t.task, cfg.data_dir).domain);
        auto memory = belief::Memory::deserialize(t.final->memory, skeleton);
        out << pddl::print_domain(memory.threshold_domain(skeleton, threshold));
        return exit_code::ok;
    } catch (const std::exception& e) {
        err << trace.string() << ": " << e.what() << '\n';
        return exit_code::failure;
    }
}

int cmd_plan(const fs::path& domain, const fs::path& problem, const std::string& search, double time_budget,
             std::ostream& out, std::ostream& err) {
    planner::PlannerConfig pc;
    if (search == "bfs") pc.search_mode = planner::SearchMode::BreadthFirst;
    else if (search != "gbfs") {
        err << "unknown search '" << search << "'\n";
        return exit_code::bad_config;
    }
    if (time_budget <= 0) {
        err << "time budget must be > 0\n";
        return exit_code::bad_config;
    }
    pc.time_budget = std::chrono::duration<double>(time_budget);
    try {
        auto d = pddl::parse_domain(slurp(domain));
        auto p = pddl::parse_problem(slurp(problem), d);
        auto r = planner::plan(d, p, pc);
        out << "; " << planner::to_string(r.status) << ", " << r.satisfied_goal_conjuncts << " goal conjuncts, "
            << r.expanded_nodes << " expansions\n";
        for (const auto& a : r.plan) out << a.str() << '\n';
        return r.complete() ? exit_code::ok : exit_code::failure;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::failure;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Learns PDDL action semantics by planning, acting and explaining failures.", "induct"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the learning loop for every configured task and seed");
    std::string config_path;
    Overrides ov;
    std::uint64_t seed = 0;
    std::string env, task, proposer, out_dir;
    run->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", seed, "single seed, replacing the configured list");
    auto* env_opt = run->add_option("--env", env, "environment: blocksworld or gridquest");
    auto* task_opt = run->add_option("--task", task, "single task id, replacing the configured list");
    auto* prop_opt = run->add_option("--proposer", proposer, "oracle, heuristic or llm for every role");
    auto* out_opt = run->add_option("--out", out_dir, "output directory");

    auto* rep = app.add_subcommand("replay", "re-execute a trace and compare every feedback");
    std::string trace_path;
    rep->add_option("trace", trace_path, "trace file")->required();

    auto* ev = app.add_subcommand("eval", "recompute metrics from traces");
    std::vector<std::string> traces;
    std::string table;
    ev->add_option("traces", traces, "trace files")->required();
    ev->add_option("--out", table, "also write the table to this file");

    auto* pd = app.add_subcommand("print-domain", "print the domain held at a belief threshold");
    std::string pd_trace;
    double threshold = 0.5;
    pd->add_option("trace", pd_trace, "trace file")->required();
    pd->add_option("--threshold", threshold, "belief threshold")->check(CLI::Range(0.0, 1.0));

    auto* pl = app.add_subcommand("plan", "plan with the built-in search");
    std::string dom, prob, search = "gbfs";
    double time_budget = 30.0;
    pl->add_option("domain", dom, "domain file")->required()->check(CLI::ExistingFile);
    pl->add_option("problem", prob, "problem file")->required()->check(CLI::ExistingFile);
    pl->add_option("--search", search, "gbfs or bfs");
    pl->add_option("--time", time_budget, "time budget in seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::bad_config;
    }

    if (*run) {
        RunConfig cfg;
        try {
            if (!config_path.empty()) cfg = load_config(config_path);
        } catch (const ConfigError& e) {
            err << "invalid config: " << e.what() << '\n';
            return exit_code::bad_config;
        }
        if (*seed_opt) ov.seed = seed;
        if (*env_opt) ov.env = env;
        if (*task_opt) ov.task = task;
        if (*prop_opt) ov.proposer = proposer;
        if (*out_opt) ov.out = out_dir;
        apply_overrides(cfg, ov);
        return cmd_run(cfg, out, err);
    }
    if (*rep) return cmd_replay(trace_path, out, err);
    if (*ev) {
        std::vector<fs::path> paths(traces.begin(), traces.end());
        return cmd_eval(paths, table.empty() ? std::nullopt : std::optional<fs::path>(table), out, err);
    }
    if (*pd) return cmd_print_domain(pd_trace, threshold, out, err);
    return cmd_plan(dom, prob, search, time_budget, out, err);
}

}  // namespace induct::cli

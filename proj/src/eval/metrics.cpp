#include "induct/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace induct::eval {

double f1_score(std::size_t predicted, std::size_t truth, std::size_t common) {
    if (predicted == 0 && truth == 0) return 100.0;  // nothing to learn
    if (common == 0) return 0.0;
    const double p = static_cast<double>(common) / predicted;
    const double r = static_cast<double>(common) / truth;
    return 100.0 * 2.0 * p * r / (p + r);
}

std::string path_action(const std::string& path_key) {
    auto pre = path_key.find("_pre-");
    auto post = path_key.find("_post-");
    auto cut = std::min(pre, post);
    if (cut == std::string::npos) throw EvalError("not a path key: '" + path_key + "'");
    return path_key.substr(0, cut);
}

F1Report f1(const std::vector<std::string>& predicted_paths, const std::vector<std::string>& truth_paths) {
    const std::set<std::string> pred(predicted_paths.begin(), predicted_paths.end());
    const std::set<std::string> truth(truth_paths.begin(), truth_paths.end());
    F1Report r;
    r.predicted = pred.size();
    r.truth = truth.size();
    for (const auto& p : pred) {
        auto& a = r.per_action[path_action(p)];
        ++a.predicted;
        if (truth.count(p)) {
            ++r.common;
            ++a.common;
        } else {
            r.spurious.push_back(p);
        }
    }
    for (const auto& t : truth) {
        ++r.per_action[path_action(t)].truth;
        if (!pred.count(t)) r.missing.push_back(t);
    }
    for (auto& [name, a] : r.per_action) a.f1 = f1_score(a.predicted, a.truth, a.common);

    auto ratio = [](std::size_t num, std::size_t den) { return den == 0 ? 0.0 : 100.0 * num / den; };
    r.precision = ratio(r.common, r.predicted);
    r.recall = ratio(r.common, r.truth);
    r.precision_as_written = ratio(r.common, r.truth);
    r.recall_as_written = ratio(r.common, r.predicted);
    r.f1 = f1_score(r.predicted, r.truth, r.common);
    r.f1_as_written = f1_score(r.truth, r.predicted, r.common);
    return r;
}

F1Report f1(const pddl::Domain& predicted, const pddl::Domain& truth) {
    if (predicted.actions.size() != truth.actions.size())
        throw EvalError("action sets differ: " + std::to_string(predicted.actions.size()) + " vs " +
                        std::to_string(truth.actions.size()) + " actions");
    for (const auto& a : truth.actions) {
        const auto* p = predicted.find_action(a.name);
        if (!p) throw EvalError("predicted domain lacks action '" + a.name + "'");
        if (p->params.size() != a.params.size())
            throw EvalError("action '" + a.name + "' has a different number of parameters");
    }
    return f1(belief::enumerate_paths(predicted), belief::enumerate_paths(truth));
}

F1Report f1(const belief::Memory& memory, const pddl::Domain& truth, double threshold) {
    for (const auto& leaf : memory.leaves())
        if (!truth.find_action(leaf.action)) throw EvalError("memory holds unknown action '" + leaf.action + "'");
    return f1(memory.paths_at_threshold(threshold), belief::enumerate_paths(truth));
}

Metrics summarize(const orchestrator::ParsedTrace& trace, const pddl::Domain& truth) {
    if (!trace.final) throw EvalError("truncated trace: no final record");
    const auto& fin = *trace.final;
    Metrics m;
    m.env = trace.env;
    m.task = trace.task;
    m.seed = trace.seed;
    m.resets = fin.resets;
    m.executed_steps = fin.executed_steps;
    m.iterations = fin.iterations;
    m.success = fin.success;
    m.termination = fin.termination;
    m.goal_fraction = fin.goal_fraction;

    std::size_t steps = 0, resets = 0;
    for (const auto& e : trace.events) (std::holds_alternative<orchestrator::TraceStep>(e) ? steps : resets)++;
    if (steps != fin.executed_steps || resets != fin.resets)
        throw EvalError("inconsistent trace: final record counts " + std::to_string(fin.executed_steps) + " steps and " +
                        std::to_string(fin.resets) + " resets, records show " + std::to_string(steps) + " and " +
                        std::to_string(resets));

    const auto skeleton = pddl::strip_semantics(truth);
    try {
        m.f1 = f1(belief::Memory::deserialize(fin.memory, skeleton), truth);
        for (const auto& [iteration, text] : trace.beliefs) {
            auto mem = belief::Memory::deserialize(text, skeleton);
            m.series.push_back({iteration, mem.leaves().size(), f1(mem, truth).f1});
        }
    } catch (const belief::BeliefError& e) {
        throw EvalError(std::string("unreadable memory in trace: ") + e.what());
    }
    return m;
}

Metrics summarize(const std::string& trace_text, const pddl::Domain& truth) {
    try {
        return summarize(orchestrator::read_trace(trace_text), truth);
    } catch (const orchestrator::TraceError& e) {
        throw EvalError(e.what());
    }
}

std::string to_table(const std::vector<Metrics>& rows) {
    std::ostringstream out;
    out << "env\ttask\tseed\tf1\tprecision\trecall\tresets\tsteps\titerations\tsuccess\tgoal_fraction\ttermination\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.2f", x);
        return std::string(buf);
    };
    for (const auto& m : rows)
        out << m.env << '\t' << m.task << '\t' << m.seed << '\t' << num(m.f1.f1) << '\t' << num(m.f1.precision) << '\t'
            << num(m.f1.recall) << '\t' << m.resets << '\t' << m.executed_steps << '\t' << m.iterations << '\t'
            << (m.success ? "true" : "false") << '\t' << num(m.goal_fraction) << '\t' << m.termination << '\n';
    return out.str();
}

}  // namespace induct::eval

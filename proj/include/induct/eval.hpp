#pragma once

#include "induct/belief.hpp"
#include "induct/orchestrator.hpp"
#include "induct/pddl.hpp"

#include <map>
#include <string>
#include <vector>

namespace induct::eval {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ActionScore {
    std::size_t predicted = 0;
    std::size_t truth = 0;
    std::size_t common = 0;
    double f1 = 0.0;
};

/// Path-set agreement, in percent. The "as written" pair divides the common
/// count by the truth count for precision and by the predicted count for
/// recall; the conventional pair does the opposite. F1 is the same either way.
struct F1Report {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double precision_as_written = 0.0;
    double recall_as_written = 0.0;
    double f1_as_written = 0.0;
    std::size_t predicted = 0;
    std::size_t truth = 0;
    std::size_t common = 0;
    std::map<std::string, ActionScore> per_action;
    std::vector<std::string> missing;   // in truth, not predicted
    std::vector<std::string> spurious;  // predicted, not in truth
};

/// Harmonic mean in percent with the zero rules: nothing on either side gives
/// 100, no overlap gives 0.
double f1_score(std::size_t predicted, std::size_t truth, std::size_t common);

F1Report f1(const std::vector<std::string>& predicted_paths, const std::vector<std::string>& truth_paths);
/// Throws EvalError when the action signatures differ.
F1Report f1(const pddl::Domain& predicted, const pddl::Domain& truth);
F1Report f1(const belief::Memory& memory, const pddl::Domain& truth, double threshold = 0.5);

/// Action name of a path key ("stack_pre-and-(holding ?ob)" -> "stack").
std::string path_action(const std::string& path_key);

struct BeliefPoint {
    std::size_t iteration = 0;
    std::size_t leaves = 0;
    double f1 = 0.0;
};

struct Metrics {
    std::string env;
    std::string task;
    std::uint64_t seed = 0;
    F1Report f1;
    std::size_t resets = 0;
    std::size_t executed_steps = 0;
    std::size_t iterations = 0;
    bool success = false;
    std::string termination;
    double goal_fraction = 0.0;
    std::vector<BeliefPoint> series;
};

/// Metrics of a finished trace. Counters come from the final record and are
/// cross-checked against the recorded steps and resets. Throws EvalError on a
/// truncated or inconsistent trace.
Metrics summarize(const orchestrator::ParsedTrace& trace, const pddl::Domain& truth);
Metrics summarize(const std::string& trace_text, const pddl::Domain& truth);

/// Tab-separated, one row per run, with a header line.
std::string to_table(const std::vector<Metrics>& rows);

}  // namespace induct::eval

#pragma once

#include "induct/pddl.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace induct::envs {

class EnvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Declarative task: hidden domain, true problem and the language side of the goal.
struct Task {
    std::string env;
    std::string id;
    pddl::Domain domain;
    pddl::Problem problem;
    std::string goal_text;
    std::string rules_text;
    std::vector<pddl::GroundAction> reference_plan;
    std::vector<std::vector<pddl::GroundAction>> alternative_plans;
    int visibility_radius = 1;
};

std::filesystem::path default_data_dir();

/// Loads <data_dir>/tasks/<env>-<id>.json. Throws EnvError for unknown tasks.
Task load_task(const std::string& env, const std::string& id,
               const std::filesystem::path& data_dir = default_data_dir());

enum class Observability { Full, Partial };

struct EnvConfig {
    std::string env = "blocksworld";
    std::string task = "1";
    Observability observability = Observability::Full;
    double noise_probability = 0.0;
    std::uint64_t seed = 0;
    std::filesystem::path data_dir = default_data_dir();
};

struct Observation {
    pddl::State atoms;
    std::vector<pddl::TypedName> known_objects;

    bool operator==(const Observation&) const = default;

    /// One atom per line, then the known objects; what a proposer gets to read.
    std::string text() const;
};

enum class StepStatus { Applied, NoChange, EpisodeReset };
std::string to_string(StepStatus s);

/// Deliberately carries no reason string.
struct ExecutionFeedback {
    std::size_t step_index = 0;
    StepStatus status = StepStatus::NoChange;
    Observation observation;
    bool goal_reached = false;
};

class Environment {
public:
    Environment(EnvConfig cfg, Task task);
    virtual ~Environment() = default;

    Observation reset();
    /// Malformed actions (unknown schema, arity, types) throw EnvError before execution.
    ExecutionFeedback step(const pddl::GroundAction& action);
    Observation observe() const;

    const pddl::State& true_state() const { return state_; }
    const Task& task() const { return task_; }
    const EnvConfig& config() const { return cfg_; }
    bool last_step_corrupted() const { return corrupted_; }
    bool goal_reached() const;

protected:
    /// Environment-specific fatal outcomes; default none.
    virtual bool is_fatal(const pddl::GroundAction&) const { return false; }
    /// Replacement for the commanded action on a noisy step, if the env models one.
    virtual std::optional<pddl::GroundAction> corrupt(const pddl::GroundAction&) { return std::nullopt; }
    /// Objects visible right now (all of them in full mode).
    virtual std::set<std::string> visible_objects() const;
    virtual void on_reset() {}
    virtual void on_applied() {}

    double uniform();
    std::size_t uniform_index(std::size_t n);

    EnvConfig cfg_;
    Task task_;
    pddl::State state_;
    std::size_t step_index_ = 0;
    bool corrupted_ = false;

private:
    std::mt19937_64 rng_;
};

/// Stacked blocks on a table with one arm. Noise: a stack/putdown may release
/// the block onto a different clear target.
class BlocksWorld : public Environment {
public:
    BlocksWorld(EnvConfig cfg, Task task);

protected:
    std::optional<pddl::GroundAction> corrupt(const pddl::GroundAction& action) override;
};

/// Static grid with items picked up on entry and monsters fought on entry.
/// Walking into a monster without the item that beats it restarts the episode.
class GridQuest : public Environment {
public:
    GridQuest(EnvConfig cfg, Task task);

    /// Cells inside the explored region (partial mode) or all cells.
    const std::set<std::string>& region() const { return region_; }

protected:
    bool is_fatal(const pddl::GroundAction& action) const override;
    std::set<std::string> visible_objects() const override;
    void on_reset() override;
    void on_applied() override;

private:
    void reveal_around_agent();

    std::set<std::string> region_;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);

enum class Consistency { Consistent, Mismatch };

/// Compares the believed transition of `action` from pre_obs with post_obs,
/// restricted to atoms whose arguments are all known in post_obs.
Consistency stepwise_check(const Observation& pre_obs, const pddl::GroundAction& action,
                           const Observation& post_obs, const pddl::Domain& believed_domain,
                           const pddl::Problem& problem);

/// Cell object name for a grid coordinate, e.g. c23.
std::string cell_name(int row, int col);

}  // namespace induct::envs

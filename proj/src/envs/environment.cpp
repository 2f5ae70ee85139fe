#include "induct/envs.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace induct::envs {

std::string to_string(StepStatus s) {
    switch (s) {
    case StepStatus::Applied: return "applied";
    case StepStatus::NoChange: return "no_change";
    case StepStatus::EpisodeReset: return "episode_reset";
    }
    return "?";
}

std::string Observation::text() const {
    std::ostringstream out;
    for (const auto& a : atoms.atoms) out << a.str() << '\n';
    out << "objects:";
    for (const auto& o : known_objects) out << ' ' << o.name << " - " << o.type;
    out << '\n';
    return out.str();
}

Environment::Environment(EnvConfig cfg, Task task) : cfg_(std::move(cfg)), task_(std::move(task)), rng_(cfg_.seed) {
    if (!(cfg_.noise_probability >= 0.0 && cfg_.noise_probability <= 1.0))
        throw EnvError("noise probability must lie in [0,1]");
    state_ = task_.problem.initial_state();
}

double Environment::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

std::size_t Environment::uniform_index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

Observation Environment::reset() {
    state_ = task_.problem.initial_state();
    step_index_ = 0;
    corrupted_ = false;
    on_reset();
    return observe();
}

bool Environment::goal_reached() const { return pddl::holds(state_, pddl::expand_exists(task_.problem.goal, task_.domain, task_.problem)); }

std::set<std::string> Environment::visible_objects() const {
    std::set<std::string> all;
    for (const auto& o : task_.problem.objects) all.insert(o.name);
    return all;
}

Observation Environment::observe() const {
    Observation obs;
    const auto visible = visible_objects();
    for (const auto& a : state_.atoms) {
        bool shown = std::all_of(a.args.begin(), a.args.end(), [&](const std::string& x) { return visible.count(x); });
        if (shown) obs.atoms.atoms.insert(a);
    }
    for (const auto& o : task_.problem.objects)
        if (visible.count(o.name)) obs.known_objects.push_back(o);
    return obs;
}

ExecutionFeedback Environment::step(const pddl::GroundAction& action) {
    try {
        pddl::check_ground_action(action, task_.domain, task_.problem);
    } catch (const pddl::PddlError& e) {
        throw EnvError(std::string("malformed action ") + action.str() + ": " + e.what());
    }
    ExecutionFeedback fb;
    fb.step_index = step_index_++;
    corrupted_ = false;

    if (is_fatal(action)) {
        state_ = task_.problem.initial_state();
        step_index_ = 0;
        on_reset();
        fb.status = StepStatus::EpisodeReset;
    } else if (!pddl::applicable(state_, action, task_.domain, task_.problem)) {
        fb.status = StepStatus::NoChange;
    } else {
        pddl::GroundAction executed = action;
        if (cfg_.noise_probability > 0.0) {
            // the draw happens for every applicable step so the stream does not depend on the action mix
            bool noisy = uniform() < cfg_.noise_probability;
            if (noisy) {
                if (auto alt = corrupt(action)) {
                    executed = *alt;
                    corrupted_ = true;
                }
            }
        }
        const auto* schema = task_.domain.find_action(executed.name);
        auto g = pddl::ground(task_.domain, *schema, executed.args, task_.problem);
        state_ = pddl::apply(state_, g.effect);
        fb.status = StepStatus::Applied;
        on_applied();
    }
    fb.observation = observe();
    fb.goal_reached = goal_reached();
    return fb;
}

BlocksWorld::BlocksWorld(EnvConfig cfg, Task task) : Environment(std::move(cfg), std::move(task)) {
    if (cfg_.observability == Observability::Partial)
        throw EnvError("blocksworld only supports full observability");
}

std::optional<pddl::GroundAction> BlocksWorld::corrupt(const pddl::GroundAction& action) {
    if (action.name != "stack" && action.name != "putdown") return std::nullopt;
    const std::string& block = action.args.at(0);
    // candidate targets: other clear blocks, or the table (empty string)
    std::vector<std::string> targets;
    if (action.name == "stack") targets.push_back("");
    for (const auto& a : state_.atoms) {
        if (a.predicate != "clear") continue;
        const std::string& b = a.args[0];
        if (b == block) continue;
        if (action.name == "stack" && b == action.args.at(1)) continue;
        targets.push_back(b);
    }
    if (targets.empty()) return std::nullopt;
    const std::string& t = targets[uniform_index(targets.size())];
    if (t.empty()) return pddl::GroundAction{"putdown", {block}};
    return pddl::GroundAction{"stack", {block, t}};
}

GridQuest::GridQuest(EnvConfig cfg, Task task) : Environment(std::move(cfg), std::move(task)) { on_reset(); }

namespace {

// item that beats each monster
const std::map<std::string, std::string>& beats() {
    static const std::map<std::string, std::string> m{{"golem", "paper"}, {"wraith", "scissors"}, {"imp", "rock"}};
    return m;
}

const std::map<std::string, std::string>& move_relation() {
    static const std::map<std::string, std::string> m{{"up", "north"}, {"down", "south"}, {"left", "west"}, {"right", "east"}};
    return m;
}

}  // namespace

bool GridQuest::is_fatal(const pddl::GroundAction& action) const {
    auto rel = move_relation().find(action.name);
    if (rel == move_relation().end() || action.args.size() != 2) return false;
    const auto& from = action.args[0];
    const auto& to = action.args[1];
    if (!state_.contains(pddl::Atom{"agent-at", {from}}) || !state_.contains(pddl::Atom{rel->second, {from, to}}))
        return false;
    for (const auto& [monster, item] : beats()) {
        if (state_.contains(pddl::Atom{monster + "-at", {to}}) && !state_.contains(pddl::Atom{"has-" + item, {}}))
            return true;
    }
    return false;
}

void GridQuest::reveal_around_agent() {
    const int r = task_.visibility_radius;
    for (const auto& a : state_.atoms) {
        if (a.predicate != "agent-at") continue;
        const std::string& cell = a.args[0];
        int row = cell[1] - '0', col = cell[2] - '0';
        for (int dr = -r; dr <= r; ++dr)
            for (int dc = -r; dc <= r; ++dc) {
                std::string n = cell_name(row + dr, col + dc);
                if (task_.problem.object_type(n)) region_.insert(n);
            }
    }
}

void GridQuest::on_reset() {
    region_.clear();
    if (cfg_.observability == Observability::Full) {
        for (const auto& o : task_.problem.objects) region_.insert(o.name);
        return;
    }
    reveal_around_agent();
}

void GridQuest::on_applied() {
    if (cfg_.observability == Observability::Partial) reveal_around_agent();
}

std::set<std::string> GridQuest::visible_objects() const { return region_; }

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
    Task task = load_task(cfg.env, cfg.task, cfg.data_dir);
    if (cfg.env == "blocksworld") return std::make_unique<BlocksWorld>(cfg, std::move(task));
    if (cfg.env == "gridquest") return std::make_unique<GridQuest>(cfg, std::move(task));
    throw EnvError("unknown environment '" + cfg.env + "'");
}

Consistency stepwise_check(const Observation& pre_obs, const pddl::GroundAction& action, const Observation& post_obs,
                           const pddl::Domain& believed_domain, const pddl::Problem& problem) {
    const auto* schema = believed_domain.find_action(action.name);
    if (!schema) throw pddl::PddlError("action '" + action.name + "' is not in the believed domain");
    pddl::State expected = pre_obs.atoms;
    auto g = pddl::ground(believed_domain, *schema, action.args, problem);
    if (pddl::holds(pre_obs.atoms, g.precondition)) expected = pddl::apply(pre_obs.atoms, g.effect);

    std::set<std::string> known;
    for (const auto& o : post_obs.known_objects) known.insert(o.name);
    auto visible = [&](const pddl::Atom& a) {
        return std::all_of(a.args.begin(), a.args.end(), [&](const std::string& x) { return known.count(x); });
    };
    std::set<pddl::Atom> lhs, rhs;
    for (const auto& a : expected.atoms)
        if (visible(a)) lhs.insert(a);
    for (const auto& a : post_obs.atoms.atoms)
        if (visible(a)) rhs.insert(a);
    return lhs == rhs ? Consistency::Consistent : Consistency::Mismatch;
}

}  // namespace induct::envs

#include "induct/orchestrator.hpp"

#include <algorithm>

namespace induct::orchestrator {

using pddl::GroundAction;

std::string to_string(Mode m) { return m == Mode::Reset ? "reset" : "reset_free"; }

Mode parse_mode(const std::string& s) {
    if (s == "reset") return Mode::Reset;
    if (s == "reset_free") return Mode::ResetFree;
    throw LoopError("unknown mode '" + s + "' (expected reset or reset_free)");
}

void LoopConfig::validate() const {
    belief.validate();
    if (planner.time_budget.count() <= 0 || planner.node_budget == 0) throw LoopError("planner budgets must be > 0");
    if (max_resets == 0 || max_executed_steps == 0 || max_iterations == 0) throw LoopError("loop budgets must be > 0");
    if (!retrieval_corpus.empty() && !std::filesystem::is_regular_file(retrieval_corpus))
        throw LoopError("retrieval corpus not found: " + retrieval_corpus.string());
}

void Proposers::validate() const {
    if (!sampler || !semantics || !error || !checker || !goal) throw LoopError("every proposer role needs an implementation");
}

pddl::Problem init_problem(const envs::Observation& obs, const std::string& goal_text, const pddl::Domain& skeleton,
                           proposer::GoalProposer& goal) {
    pddl::Problem p;
    p.name = "observed";
    p.domain_name = skeleton.name;
    p.objects = obs.known_objects;
    p.init = obs.atoms.atoms;
    p.goal = pddl::Condition::conj();
    try {
        p.goal = goal.propose_goal(goal_text, p, skeleton);
        // the goal must be expressible over this problem
        return pddl::parse_problem(pddl::print_problem(p), skeleton);
    } catch (const pddl::PddlError& e) {
        throw LoopError(std::string("goal does not validate against the problem: ") + e.what());
    } catch (const proposer::ProposerError& e) {
        throw LoopError(std::string("cannot resolve the task text into a goal: ") + e.what());
    }
}

std::vector<GroundAction> prospect(const std::vector<GroundAction>& trajectory, const pddl::Domain& domain,
                                   const pddl::Problem& problem, std::size_t k, std::mt19937_64& rng) {
    if (trajectory.empty()) throw LoopError("prospection needs a nonempty trajectory");
    auto step = [&](const pddl::State& s, const GroundAction& a) -> std::optional<pddl::State> {
        try {
            return pddl::successor(s, a, domain, problem);
        } catch (const pddl::PddlError&) {
            return std::nullopt;  // malformed for this problem
        }
    };

    std::vector<GroundAction> out = trajectory;
    std::optional<std::vector<GroundAction>> candidates;
    pddl::State s = problem.initial_state();
    const std::size_t horizon = std::min(k, out.size());
    for (std::size_t i = 0; i < horizon; ++i) {
        if (auto next = step(s, out[i])) {
            s = std::move(*next);
            continue;
        }
        if (!candidates) candidates = pddl::enumerate_ground_actions(domain, problem);
        std::vector<std::pair<const GroundAction*, pddl::State>> ok;
        for (const auto& a : *candidates)
            if (auto next = step(s, a)) ok.emplace_back(&a, std::move(*next));
        if (ok.empty()) {
            if (i == 0) throw ProspectionError("no action is applicable in the initial state under the sampled domain");
            out.resize(i);  // keep the valid prefix
            break;
        }
        auto& [a, next] = ok[rng() % ok.size()];
        out[i] = *a;
        s = std::move(next);
    }
    return out;
}

Loop::Loop(LoopConfig cfg, envs::Environment& env, Proposers& proposers, Trace* trace)
    : cfg_(std::move(cfg)), env_(env), proposers_(proposers), trace_(trace),
      skeleton_(pddl::strip_semantics(env.task().domain)), domain_rng_(cfg_.belief.seed),
      prospect_rng_(cfg_.seed) {
    cfg_.validate();
    proposers_.validate();
    auto o0 = env_.reset();
    problem_ = init_problem(o0, env_.task().goal_text, skeleton_, *proposers_.goal);
    start_problem_ = problem_;
    if (trace_) trace_->init(problem_, env_.task().goal_text);
}

bool Loop::finish(const std::string& why, bool success) {
    done_ = true;
    success_ = success;
    termination_ = why;
    return false;
}

RunReport Loop::report() const {
    RunReport r;
    r.success = success_;
    r.termination = termination_;
    r.resets = resets_;
    r.executed_steps = steps_;
    r.iterations = iterations_;
    const auto& task = env_.task();
    auto goal = pddl::expand_exists(task.problem.goal, task.domain, task.problem);
    auto total = pddl::goal_conjuncts(goal).size();
    r.goal_fraction = total == 0 ? 1.0 : static_cast<double>(pddl::satisfied_conjuncts(env_.true_state(), goal)) / total;
    r.memory = memory_;
    r.best_domain = memory_.threshold_domain(skeleton_, 0.5);
    r.problem = problem_;
    return r;
}

void Loop::learn(proposer::ProposerContext& ctx, std::size_t iteration) {
    auto sem = proposers_.semantics->generate_semantics(ctx);
    if (trace_) trace_->semantics(iteration, sem);
    memory_ = memory_.update(sem, cfg_.belief);
    if (trace_) trace_->belief(iteration, memory_);
}

bool Loop::run_iteration() {
    if (done_) return false;
    if (steps_ >= cfg_.max_executed_steps) return finish("step_budget");
    if (iterations_ >= cfg_.max_iterations) return finish("iteration_budget");

    if (cfg_.mode == Mode::Reset) {
        if (dirty_) {
            if (resets_ >= cfg_.max_resets) return finish("reset_budget");
            env_.reset();
            ++resets_;
            dirty_ = false;
            if (trace_) trace_->reset(resets_, "iteration");
        }
    } else if (iterations_ > 0) {
        // reset-free: the problem is re-derived from where the agent stands
        auto o = env_.observe();
        for (const auto& obj : o.known_objects)
            if (!problem_.object_type(obj.name)) problem_.objects.push_back(obj);
        problem_.init = o.atoms.atoms;
    }
    const std::size_t it = iterations_++;

    proposer::ProposerContext ctx;
    ctx.domain = memory_.sample(skeleton_, domain_rng_);
    ctx.skeleton = skeleton_;
    ctx.problem = problem_;
    ctx.observations.push_back(env_.observe());
    ctx.experience = &experience_;
    ctx.goal_text = env_.task().goal_text;
    ctx.rules_text = env_.task().rules_text;
    ctx.starts_at_task_init = cfg_.mode == Mode::Reset;

    auto verdict = planner::plan(ctx.domain, problem_, cfg_.planner);
    std::vector<GroundAction> sampled;
    std::string source;
    if (verdict.complete()) {
        sampled = verdict.plan;
        source = "planner";
    } else {
        ctx.partial_plan = verdict.plan;
        source = "sampler";
        try {
            sampled = proposers_.sampler->sample_trajectory(ctx);
        } catch (const proposer::ProposerError& e) {
            if (trace_) {
                trace_->iteration(it, resets_, steps_, problem_, ctx.domain, verdict, source, {}, std::nullopt);
                trace_->proposer_failure(it, "trajectory", e.what());
            }
            return true;
        }
    }

    std::vector<GroundAction> trajectory;
    if (!sampled.empty()) {
        try {
            trajectory = prospect(sampled, ctx.domain, problem_, cfg_.prospection_k, prospect_rng_);
        } catch (const ProspectionError& e) {
            if (trace_) {
                trace_->iteration(it, resets_, steps_, problem_, ctx.domain, verdict, source, sampled, std::nullopt);
                trace_->proposer_failure(it, "prospection", e.what());
            }
            return true;
        }
    }
    if (trace_) trace_->iteration(it, resets_, steps_, problem_, ctx.domain, verdict, source, sampled, trajectory);

    // execute until failure, mismatch, goal or the end of the trajectory
    bool budget_hit = false;
    for (std::size_t j = 0; j < trajectory.size(); ++j) {
        if (steps_ >= cfg_.max_executed_steps) {
            budget_hit = true;
            break;
        }
        const auto& a = trajectory[j];
        auto pre = ctx.observations.back();
        auto fb = env_.step(a);
        ++steps_;
        dirty_ = true;
        bool mismatch = false;
        if (fb.status == envs::StepStatus::Applied && cfg_.stepwise_detector)
            mismatch = envs::stepwise_check(pre, a, fb.observation, ctx.domain, problem_) == envs::Consistency::Mismatch;
        experience_.push_back({pre, a, fb.status, fb.observation, mismatch});
        ctx.actions.push_back(a);
        ctx.statuses.push_back(fb.status);
        ctx.observations.push_back(fb.observation);
        if (trace_) trace_->step(it, j, a, fb, mismatch, steps_);
        if (fb.status == envs::StepStatus::EpisodeReset) {
            // the environment put the agent back at the start by itself
            ++resets_;
            dirty_ = false;
            if (trace_) trace_->reset(resets_, "fatal");
        }
        if (fb.status != envs::StepStatus::Applied || mismatch) {
            ctx.failure_index = j;
            break;
        }
        if (fb.goal_reached) break;
    }
    const bool reached = !ctx.failure_index && env_.goal_reached();

    try {
        if (reached) {
            learn(ctx, it);
            // success needs the believed domain to re-derive a plan on its own
            const pddl::Problem& from = cfg_.mode == Mode::Reset ? problem_ : start_problem_;
            auto check = planner::plan(memory_.threshold_domain(skeleton_, 0.5), from, cfg_.planner);
            if (trace_) trace_->success_check(it, check);
            if (check.complete()) return finish("goal_reached", true);
            return true;
        }

        if (auto edit = proposers_.checker->check_problem(ctx)) {
            try {
                auto edited = proposer::apply_edit(problem_, *edit, skeleton_);
                problem_ = std::move(edited);
                if (trace_) trace_->edit(it, *edit, true, "");
                return true;  // back to sampling with the corrected problem; no learning
            } catch (const proposer::ProposerError& e) {
                if (trace_) trace_->edit(it, *edit, false, e.what());  // treated as no edit
            }
        }

        ctx.error = proposers_.error->predict_error(ctx);
        if (trace_) trace_->error(it, *ctx.error);
        learn(ctx, it);
    } catch (const proposer::ProposerError& e) {
        if (trace_) trace_->proposer_failure(it, "analysis", e.what());
    }
    if (budget_hit) return finish("step_budget");
    return true;
}

RunReport Loop::run() {
    while (run_iteration()) {
    }
    auto r = report();
    if (trace_) trace_->final(r);
    return r;
}

}  // namespace induct::orchestrator

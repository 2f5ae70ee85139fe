#include "induct/llm.hpp"

#include <regex>
#include <sstream>

namespace induct::llm {

using proposer::ProposerContext;
using proposer::ProposerError;

namespace {

// Balanced "(...)" groups at top level of `text`, in order.
std::vector<std::string> groups(const std::string& text) {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == ';') {  // PDDL comment to end of line
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (text[i] == '(') {
            if (depth++ == 0) start = i;
        } else if (text[i] == ')' && depth > 0) {
            if (--depth == 0) out.push_back(text.substr(start, i - start + 1));
        }
    }
    return out;
}

std::map<std::string, std::string> context_vars(const ProposerContext& ctx) {
    std::map<std::string, std::string> v;
    v["domain"] = pddl::print_domain(ctx.domain);
    v["skeleton"] = pddl::print_domain(ctx.skeleton);
    v["problem"] = pddl::print_problem(ctx.problem);
    std::ostringstream obs, acts, plan;
    for (std::size_t t = 0; t < ctx.observations.size(); ++t) obs << "o" << t << ":\n" << ctx.observations[t].text();
    for (std::size_t t = 0; t < ctx.actions.size(); ++t)
        acts << t << ": " << ctx.actions[t].str() << " -> "
             << (t < ctx.statuses.size() ? envs::to_string(ctx.statuses[t]) : "?") << '\n';
    for (const auto& a : ctx.partial_plan) plan << a.str() << '\n';
    v["observations"] = obs.str();
    v["actions"] = acts.str().empty() ? "none\n" : acts.str();
    v["partial_plan"] = plan.str().empty() ? "none\n" : plan.str();
    v["error"] = ctx.error ? proposer::to_string(ctx.error->kind) + "\n" + ctx.error->explanation : "none";
    v["goal_text"] = ctx.goal_text;
    v["rules"] = ctx.rules_text.empty() ? "none" : ctx.rules_text;
    return v;
}

}  // namespace

std::vector<pddl::GroundAction> parse_trajectory(const std::string& text, const pddl::Domain& domain,
                                                 const pddl::Problem& problem) {
    std::vector<pddl::GroundAction> out;
    for (const auto& g : groups(text)) {
        try {
            auto a = pddl::parse_ground_action(g);
            pddl::check_ground_action(a, domain, problem);
            out.push_back(std::move(a));
        } catch (const pddl::PddlError&) {
            // not an action over this problem; dropped
        }
    }
    return out;
}

belief::ProposedSemantics parse_semantics(const std::string& text, const pddl::Domain& skeleton,
                                          std::vector<std::string>* dropped) {
    belief::ProposedSemantics out;
    for (const auto& g : groups(text)) {
        std::string block = g;
        // tolerate a full domain: look at its action blocks
        std::vector<std::string> candidates;
        if (block.rfind("(define", 0) == 0) {
            for (const auto& inner : groups(block.substr(1, block.size() - 2)))
                if (inner.rfind("(:action", 0) == 0) candidates.push_back(inner);
        } else {
            candidates.push_back(block);
        }
        for (const auto& c : candidates) {
            try {
                std::string lowered = pddl::canonical(c);
                auto name_start = lowered.find_first_not_of(" \t\r\n", 8);
                auto name_end = lowered.find_first_of(" \t\r\n()", name_start);
                std::string name = lowered.substr(name_start, name_end - name_start);
                const pddl::ActionSchema* schema = skeleton.find_action(name);
                if (!schema) throw pddl::PddlError("unknown action '" + name + "'");
                // parse against a domain whose copy of the action has the proposed parameter names
                pddl::ActionSchema a = pddl::parse_action(c, pddl::strip_semantics(skeleton));
                if (a.params.size() != schema->params.size()) throw pddl::PddlError("parameter count differs");
                std::map<std::string, std::string> rename;
                for (std::size_t i = 0; i < a.params.size(); ++i) rename[a.params[i].name] = schema->params[i].name;
                out.actions[schema->name] =
                    belief::ActionSemantics{pddl::substitute(a.precondition, rename), pddl::substitute(a.effect, rename)};
            } catch (const pddl::PddlError& e) {
                if (dropped) dropped->push_back(c.substr(0, 60) + ": " + e.what());
            }
        }
    }
    return out;
}

std::optional<proposer::ProblemEdit> parse_edit(const std::string& text, const pddl::Domain& domain,
                                                const pddl::Problem& problem) {
    proposer::ProblemEdit edit;
    pddl::Problem extended = problem;
    std::istringstream in(text);
    std::string line;
    std::vector<std::pair<bool, std::string>> atom_lines;
    while (std::getline(in, line)) {
        std::string l = pddl::canonical(line);
        auto first = l.find_first_not_of(" \t-*");
        if (first == std::string::npos) continue;
        l = l.substr(first);
        if (l.rfind("object ", 0) == 0) {
            std::istringstream words(l.substr(7));
            std::string name, dash, type = "object";
            words >> name >> dash >> type;
            if (name.empty() || (dash != "-" && !dash.empty())) continue;
            if (!domain.has_type(type) || extended.object_type(name)) continue;
            edit.objects_to_add.push_back({name, type});
            extended.objects.push_back({name, type});
        } else if (l.rfind("add ", 0) == 0 || l.rfind("remove ", 0) == 0) {
            atom_lines.emplace_back(l[0] == 'a', l.substr(l.find(' ') + 1));
        }
    }
    for (const auto& [add, body] : atom_lines) {
        try {
            auto atom = pddl::parse_ground_atom(body, domain, &extended);
            (add ? edit.atoms_to_add : edit.atoms_to_remove).insert(atom);
        } catch (const pddl::PddlError&) {
        }
    }
    if (edit.empty()) return std::nullopt;
    return edit;
}

std::vector<pddl::GroundAction> LlmSampler::sample_trajectory(const ProposerContext& ctx) {
    if (auto p = proposer::solving_partial_plan(ctx)) return *p;
    auto reply = client_->ask("trajectory", context_vars(ctx), client_->config().sampling_temperature);
    auto plan = parse_trajectory(reply, ctx.skeleton, ctx.problem);
    if (plan.empty()) throw ProposerError("no parseable actions in the sampled trajectory");
    return plan;
}

belief::ProposedSemantics LlmSemantics::generate_semantics(const ProposerContext& ctx) {
    dropped_.clear();
    auto reply = client_->ask("semantics", context_vars(ctx), client_->config().analysis_temperature);
    auto sem = parse_semantics(reply, ctx.skeleton, &dropped_);
    if (sem.actions.empty()) throw ProposerError("no parseable action semantics in the reply");
    for (const auto& a : ctx.skeleton.actions) sem.actions.try_emplace(a.name);
    return sem;
}

proposer::PredictedError LlmErrorPredictor::predict_error(const ProposerContext& ctx) {
    ctx.validate();
    auto reply = client_->ask("error", context_vars(ctx), client_->config().analysis_temperature);
    std::string lowered = pddl::canonical(reply);
    proposer::PredictedError e;
    e.explanation = reply;
    if (lowered.find("unsatisfied_precondition") != std::string::npos ||
        lowered.find("unsatisfied precondition") != std::string::npos) {
        e.kind = proposer::PredictedError::Kind::UnsatisfiedPrecondition;
        std::smatch m;
        static const std::regex index(R"(index\s*[:=]?\s*(\d+))");
        if (std::regex_search(lowered, m, index)) e.failing_action = std::stoul(m[1].str());
        if (!e.failing_action || *e.failing_action >= ctx.actions.size()) e.failing_action = ctx.failure_index;
    } else {
        e.kind = proposer::PredictedError::Kind::UnreachedGoal;
    }
    std::vector<pddl::TypedName> none;
    for (const auto& g : groups(reply)) {
        try {
            e.culprits.push_back(pddl::parse_condition(g, ctx.skeleton, none, pddl::ConditionRole::Goal, &ctx.problem));
        } catch (const pddl::PddlError&) {
        }
    }
    if (e.kind == proposer::PredictedError::Kind::UnsatisfiedPrecondition && !e.failing_action)
        throw ProposerError("error prediction names no failing action");
    if (e.kind == proposer::PredictedError::Kind::UnreachedGoal && e.culprits.empty()) {
        // the unmet conjuncts are observable; fill them in rather than fail
        for (const auto& c : pddl::goal_conjuncts(ctx.problem.goal))
            if (!pddl::holds(ctx.observations.back().atoms, pddl::expand_exists(c, ctx.skeleton, ctx.problem)))
                e.culprits.push_back(c);
        if (e.culprits.empty()) throw ProposerError("the trajectory reached the goal; there is no error to predict");
    }
    return e;
}

std::optional<proposer::ProblemEdit> LlmChecker::check_problem(const ProposerContext& ctx) {
    auto reply = client_->ask("checker", context_vars(ctx), client_->config().analysis_temperature);
    if (pddl::canonical(reply).find("no_edit") != std::string::npos) return std::nullopt;
    return parse_edit(reply, ctx.skeleton, ctx.problem);
}

pddl::Condition LlmGoalProposer::propose_goal(const std::string& goal_text, const pddl::Problem& problem,
                                              const pddl::Domain& skeleton) {
    std::ostringstream ex;
    for (const auto& e : retriever_.top(goal_text, 2)) ex << "Instruction: " << e.instruction << "\nGoal: " << e.goal << "\n\n";
    std::map<std::string, std::string> vars{{"goal_text", goal_text},
                                            {"problem", pddl::print_problem(problem)},
                                            {"skeleton", pddl::print_domain(skeleton)},
                                            {"domain", pddl::print_domain(skeleton)},
                                            {"exemplars", ex.str().empty() ? "none\n" : ex.str()}};
    auto reply = client_->ask("goal", vars, client_->config().analysis_temperature);
    std::vector<pddl::TypedName> none;
    for (const auto& g : groups(reply)) {
        try {
            return pddl::parse_condition(g, skeleton, none, pddl::ConditionRole::Goal, &problem);
        } catch (const pddl::PddlError&) {
        }
    }
    throw ProposerError("no parseable goal in the reply");
}

}  // namespace induct::llm

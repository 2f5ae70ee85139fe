#include "induct/orchestrator.hpp"

namespace induct::orchestrator {

namespace {

const char* const kinds[] = {"oracle", "heuristic", "llm"};

void check_kind(const std::string& role, const std::string& kind) {
    for (const char* k : kinds)
        if (kind == k) return;
    throw LoopError("unknown proposer '" + kind + "' for role " + role + " (expected oracle, heuristic or llm)");
}

}  // namespace

void ProposerSelection::set_all(const std::string& kind) { sampler = semantics = error = checker = goal = kind; }

bool ProposerSelection::uses_llm() const {
    for (const auto* r : {&sampler, &semantics, &error, &checker, &goal})
        if (*r == "llm") return true;
    return false;
}

void ProposerSelection::validate() const {
    check_kind("sampler", sampler);
    check_kind("semantics", semantics);
    check_kind("error", error);
    check_kind("checker", checker);
    check_kind("goal", goal);
    if (oracle_noise < 0.0 || oracle_noise > 1.0) throw LoopError("oracle_noise must be in [0, 1]");
}

Proposers make_proposers(const ProposerSelection& sel, const envs::Task& task, std::uint64_t seed,
                         const llm::EndpointConfig& llm_cfg, const std::filesystem::path& retrieval_corpus,
                         Trace* trace, std::shared_ptr<llm::ChatTransport> transport) {
    sel.validate();
    std::shared_ptr<llm::Client> client;
    if (sel.uses_llm()) {
        llm_cfg.validate();
        if (!transport) transport = std::make_shared<llm::HttpTransport>(llm_cfg);
        llm::Client::Observer observer;
        if (trace) observer = [trace](const llm::Exchange& ex) { trace->llm(ex); };
        client = std::make_shared<llm::Client>(transport, llm_cfg, observer);
    }

    using namespace proposer;
    Proposers p;
    // distinct streams so that swapping one role does not shift another's draws
    if (sel.sampler == "oracle") p.sampler = std::make_unique<OracleSampler>(task, sel.oracle_noise, seed);
    else if (sel.sampler == "heuristic") p.sampler = std::make_unique<HeuristicSampler>(seed);
    else p.sampler = std::make_unique<llm::LlmSampler>(client);

    if (sel.semantics == "oracle") p.semantics = std::make_unique<OracleSemantics>(task, sel.oracle_noise, seed + 1);
    else if (sel.semantics == "heuristic") p.semantics = std::make_unique<HeuristicSemantics>();
    else p.semantics = std::make_unique<llm::LlmSemantics>(client);

    if (sel.error == "oracle") p.error = std::make_unique<OracleErrorPredictor>(task);
    else if (sel.error == "heuristic") p.error = std::make_unique<HeuristicErrorPredictor>();
    else p.error = std::make_unique<llm::LlmErrorPredictor>(client);

    if (sel.checker == "oracle") p.checker = std::make_unique<OracleChecker>(task);
    else if (sel.checker == "heuristic") p.checker = std::make_unique<HeuristicChecker>();
    else p.checker = std::make_unique<llm::LlmChecker>(client);

    if (sel.goal == "oracle") p.goal = std::make_unique<OracleGoalProposer>(task);
    else if (sel.goal == "heuristic") p.goal = std::make_unique<HeuristicGoalProposer>();
    else
        p.goal = std::make_unique<llm::LlmGoalProposer>(
            client, retrieval_corpus.empty() ? llm::Retriever{} : llm::Retriever(retrieval_corpus));
    return p;
}

}  // namespace induct::orchestrator

#pragma once

#include "induct/proposer.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace induct::llm {

class LlmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public LlmError {
public:
    TransportError(const std::string& what, bool retryable) : LlmError(what), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

/// Role ids double as template file stems under the prompt directory.
inline const std::vector<std::string>& roles() {
    static const std::vector<std::string> r{"trajectory", "semantics", "error", "checker", "goal"};
    return r;
}

struct EndpointConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    /// Name of the environment variable holding the API key. The key itself is never configured.
    std::string credential_env = "OPENAI_API_KEY";
    double sampling_temperature = 0.7;
    double analysis_temperature = 0.0;
    int max_retries = 3;
    double backoff_seconds = 1.0;
    double timeout_seconds = 60.0;
    std::filesystem::path prompt_dir;
    /// role -> template file name (defaults to <role>.txt)
    std::map<std::string, std::string> templates;

    std::filesystem::path template_path(const std::string& role) const;
    /// Throws LlmError when a template file is missing or a number is out of range.
    void validate() const;
};

struct Message {
    std::string role;
    std::string content;
};

struct Request {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.0;
};

class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    /// Returns the assistant text. Throws TransportError.
    virtual std::string complete(const Request& req) = 0;
};

/// OpenAI-style POST {base_url}/chat/completions.
class HttpTransport : public ChatTransport {
public:
    explicit HttpTransport(EndpointConfig cfg);
    std::string complete(const Request& req) override;

private:
    EndpointConfig cfg_;
};

/// Canned replies in order; keeps the requests it saw.
class ScriptedTransport : public ChatTransport {
public:
    explicit ScriptedTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const Request& req) override;
    const std::vector<Request>& requests() const { return requests_; }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::vector<Request> requests_;
    std::mutex mutex_;
};

struct Exchange {
    std::string role;
    Request request;
    std::string response;
    int attempts = 0;
};

class Client {
public:
    using Observer = std::function<void(const Exchange&)>;

    Client(std::shared_ptr<ChatTransport> transport, EndpointConfig cfg, Observer observer = {});

    const EndpointConfig& config() const { return cfg_; }
    /// Renders the role's template with `vars` and sends it, retrying with exponential backoff.
    std::string ask(const std::string& role, const std::map<std::string, std::string>& vars, double temperature);

private:
    std::shared_ptr<ChatTransport> transport_;
    EndpointConfig cfg_;
    Observer observer_;
    std::map<std::string, std::string> templates_;
};

/// Replaces {name} placeholders; unknown placeholders are left in place.
std::string render(const std::string& tmpl, const std::map<std::string, std::string>& vars);

struct Exemplar {
    std::string instruction;
    std::string goal;
};

/// Top-k exemplar lookup by token-level F1 between instructions.
class Retriever {
public:
    Retriever() = default;
    explicit Retriever(const std::filesystem::path& jsonl);
    explicit Retriever(std::vector<Exemplar> corpus) : corpus_(std::move(corpus)) {}

    std::vector<Exemplar> top(const std::string& query, std::size_t k = 2) const;
    std::size_t size() const { return corpus_.size(); }

    static double token_f1(const std::string& a, const std::string& b);

private:
    std::vector<Exemplar> corpus_;
};

// Text extraction shared by the roles; everything goes through the PDDL parser.

std::vector<pddl::GroundAction> parse_trajectory(const std::string& text, const pddl::Domain& domain,
                                                 const pddl::Problem& problem);
/// Dropped fragments are appended to `dropped`.
belief::ProposedSemantics parse_semantics(const std::string& text, const pddl::Domain& skeleton,
                                          std::vector<std::string>* dropped = nullptr);
std::optional<proposer::ProblemEdit> parse_edit(const std::string& text, const pddl::Domain& domain,
                                                const pddl::Problem& problem);

class LlmSampler : public proposer::TrajectorySampler {
public:
    explicit LlmSampler(std::shared_ptr<Client> client) : client_(std::move(client)) {}
    std::string name() const override { return "llm"; }
    std::vector<pddl::GroundAction> sample_trajectory(const proposer::ProposerContext& ctx) override;

private:
    std::shared_ptr<Client> client_;
};

class LlmSemantics : public proposer::SemanticsGenerator {
public:
    explicit LlmSemantics(std::shared_ptr<Client> client) : client_(std::move(client)) {}
    std::string name() const override { return "llm"; }
    belief::ProposedSemantics generate_semantics(const proposer::ProposerContext& ctx) override;
    const std::vector<std::string>& last_dropped() const { return dropped_; }

private:
    std::shared_ptr<Client> client_;
    std::vector<std::string> dropped_;
};

class LlmErrorPredictor : public proposer::ErrorPredictor {
public:
    explicit LlmErrorPredictor(std::shared_ptr<Client> client) : client_(std::move(client)) {}
    std::string name() const override { return "llm"; }
    proposer::PredictedError predict_error(const proposer::ProposerContext& ctx) override;

private:
    std::shared_ptr<Client> client_;
};

class LlmChecker : public proposer::ProblemChecker {
public:
    explicit LlmChecker(std::shared_ptr<Client> client) : client_(std::move(client)) {}
    std::string name() const override { return "llm"; }
    std::optional<proposer::ProblemEdit> check_problem(const proposer::ProposerContext& ctx) override;

private:
    std::shared_ptr<Client> client_;
};

class LlmGoalProposer : public proposer::GoalProposer {
public:
    LlmGoalProposer(std::shared_ptr<Client> client, Retriever retriever = {})
        : client_(std::move(client)), retriever_(std::move(retriever)) {}
    std::string name() const override { return "llm"; }
    pddl::Condition propose_goal(const std::string& goal_text, const pddl::Problem& problem,
                                 const pddl::Domain& skeleton) override;

private:
    std::shared_ptr<Client> client_;
    Retriever retriever_;
};

}  // namespace induct::llm

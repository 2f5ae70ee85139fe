#include "induct/llm.hpp"

#ifdef INDUCT_HTTPS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

namespace induct::llm {

using nlohmann::json;

std::filesystem::path EndpointConfig::template_path(const std::string& role) const {
    auto it = templates.find(role);
    return prompt_dir / (it != templates.end() ? it->second : role + ".txt");
}

void EndpointConfig::validate() const {
    if (max_retries < 0) throw LlmError("max_retries must be >= 0");
    if (backoff_seconds < 0) throw LlmError("backoff_seconds must be >= 0");
    if (timeout_seconds <= 0) throw LlmError("timeout_seconds must be > 0");
    if (credential_env.empty()) throw LlmError("credential_env must name an environment variable");
    for (const auto& role : roles())
        if (!std::filesystem::is_regular_file(template_path(role)))
            throw LlmError("missing prompt template for role '" + role + "': " + template_path(role).string());
}

HttpTransport::HttpTransport(EndpointConfig cfg) : cfg_(std::move(cfg)) {}

std::string HttpTransport::complete(const Request& req) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.base_url, m, url)) throw TransportError("bad base url '" + cfg_.base_url + "'", false);
    const std::string origin = m[1].str();
    std::string path = m[2].matched ? m[2].str() : "";
    while (!path.empty() && path.back() == '/') path.pop_back();
    path += "/chat/completions";

    const char* key = std::getenv(cfg_.credential_env.c_str());
    if (!key || !*key) throw TransportError("environment variable " + cfg_.credential_env + " is not set", false);

    json body{{"model", req.model}, {"temperature", req.temperature}, {"messages", json::array()}};
    for (const auto& msg : req.messages) body["messages"].push_back({{"role", msg.role}, {"content", msg.content}});

    httplib::Client cli(origin);
    const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
        throw TransportError("endpoint answered " + std::to_string(res->status), true);
    if (res->status != 200)
        throw TransportError("endpoint answered " + std::to_string(res->status) + ": " + res->body.substr(0, 200), false);
    try {
        auto j = json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed completion: ") + e.what(), false);
    }
}

std::string ScriptedTransport::complete(const Request& req) {
    std::lock_guard lock(mutex_);
    requests_.push_back(req);
    if (next_ >= replies_.size()) throw TransportError("script exhausted", false);
    return replies_[next_++];
}

Client::Client(std::shared_ptr<ChatTransport> transport, EndpointConfig cfg, Observer observer)
    : transport_(std::move(transport)), cfg_(std::move(cfg)), observer_(std::move(observer)) {
    for (const auto& role : roles()) {
        std::ifstream in(cfg_.template_path(role));
        if (!in) continue;  // validate() reports missing templates; a role may not be used
        std::stringstream ss;
        ss << in.rdbuf();
        templates_[role] = ss.str();
    }
}

std::string Client::ask(const std::string& role, const std::map<std::string, std::string>& vars, double temperature) {
    auto it = templates_.find(role);
    if (it == templates_.end()) throw LlmError("no prompt template for role '" + role + "'");
    Exchange ex;
    ex.role = role;
    ex.request.model = cfg_.model;
    ex.request.temperature = temperature;
    ex.request.messages.push_back({"user", render(it->second, vars)});
    for (int attempt = 0;; ++attempt) {
        ex.attempts = attempt + 1;
        try {
            ex.response = transport_->complete(ex.request);
            break;
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= cfg_.max_retries) throw;
            std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.backoff_seconds * (1 << attempt)));
        }
    }
    if (observer_) observer_(ex);
    return ex.response;
}

std::string render(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string::npos) {
                auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

Retriever::Retriever(const std::filesystem::path& jsonl) {
    std::ifstream in(jsonl);
    if (!in) throw LlmError("cannot read retrieval corpus " + jsonl.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = json::parse(line);
            corpus_.push_back({j.at("instruction").get<std::string>(), j.at("goal").get<std::string>()});
        } catch (const json::exception& e) {
            throw LlmError(jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

namespace {

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

double Retriever::token_f1(const std::string& a, const std::string& b) {
    auto ta = tokens(a), tb = tokens(b);
    if (ta.empty() || tb.empty()) return 0.0;
    std::map<std::string, int> count;
    for (const auto& t : tb) ++count[t];
    int common = 0;
    for (const auto& t : ta)
        if (count[t] > 0) {
            --count[t];
            ++common;
        }
    if (common == 0) return 0.0;
    double p = static_cast<double>(common) / ta.size(), r = static_cast<double>(common) / tb.size();
    return 2 * p * r / (p + r);
}

std::vector<Exemplar> Retriever::top(const std::string& query, std::size_t k) const {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < corpus_.size(); ++i) scored.emplace_back(-token_f1(query, corpus_[i].instruction), i);
    std::stable_sort(scored.begin(), scored.end());
    std::vector<Exemplar> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(corpus_[scored[i].second]);
    return out;
}

}  // namespace induct::llm

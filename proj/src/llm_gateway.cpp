#include <cmath>
#include <thread>

#include <json.hpp>

#include "docrepair/llm.hpp"

namespace docrepair {

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::doc_gen: return "doc_gen";
        case Stage::retrieval: return "retrieval";
        case Stage::file_loc: return "file_loc";
        case Stage::func_loc: return "func_loc";
        case Stage::repair: return "repair";
    }
    return "unknown";
}

Stage stage_from_string(std::string_view name) {
    for (Stage s : kAllStages)
        if (to_string(s) == name) return s;
    throw ConfigError("unknown stage: " + std::string(name));
}

void LlmRequest::validate() const {
    if (messages.empty()) throw ConfigError("llm request has no messages");
    if (model_id.empty()) throw ConfigError("llm request has no model id");
    if (temperature.tenths() < 0 || temperature.tenths() > 10)
        throw ConfigError("temperature out of range: " + temperature.str());
}

std::string LlmRequest::joined_text() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += '\n';
        out += m.text;
    }
    return out;
}

std::string request_digest(const LlmRequest& req) {
    nlohmann::json j;
    j["stage"] = to_string(req.stage);
    j["model"] = req.model_id;
    j["temperature_tenths"] = req.temperature.tenths();
    j["seed"] = req.seed ? nlohmann::json(*req.seed) : nlohmann::json(nullptr);
    auto& msgs = j["messages"] = nlohmann::json::array();
    for (const auto& m : req.messages) {
        nlohmann::json images = nlohmann::json::array();
        for (const auto& img : m.images) images.push_back(img.mime + ":" + sha256_hex(img.bytes));
        msgs.push_back({{"role", m.role}, {"text", m.text}, {"images", images}});
    }
    return sha256_hex(j.dump());
}

const StageUsage& UsageLedger::at(Stage s) const {
    static const StageUsage empty;
    auto it = stages.find(s);
    return it == stages.end() ? empty : it->second;
}

std::int64_t UsageLedger::total_tokens() const {
    std::int64_t t = 0;
    for (const auto& [_, u] : stages) t += u.tokens();
    return t;
}

double UsageLedger::total_cost() const {
    double c = 0.0;
    for (Stage s : kAllStages) c += at(s).cost;
    return c;
}

namespace {

class InFlight {
public:
    explicit InFlight(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
    ~InFlight() { sem_.release(); }
    InFlight(const InFlight&) = delete;
    InFlight& operator=(const InFlight&) = delete;

private:
    std::counting_semaphore<>& sem_;
};

}  // namespace

LlmGateway::LlmGateway(std::shared_ptr<ChatProvider> chat, std::shared_ptr<Embedder> embedder,
                       GatewayConfig config)
    : chat_(std::move(chat)),
      embedder_(std::move(embedder)),
      config_(std::move(config)),
      in_flight_(std::max(1, config_.max_in_flight)) {
    if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

double LlmGateway::price_of(const std::string& model, const Usage& usage) const {
    auto it = config_.prices.find(model);
    if (it == config_.prices.end()) return 0.0;
    return static_cast<double>(usage.input_tokens) * it->second.input +
           static_cast<double>(usage.output_tokens) * it->second.output;
}

void LlmGateway::check_budget() const {
    if (!config_.cost_cap) return;
    std::lock_guard lock(mu_);
    const double spent = ledger_locked().total_cost();
    if (spent >= *config_.cost_cap)
        throw BudgetExceeded("cost cap reached: spent " + std::to_string(spent) + " of " +
                             std::to_string(*config_.cost_cap));
}

template <class F>
auto LlmGateway::with_retries(F&& call) -> decltype(call()) {
    for (int attempt = 0;; ++attempt) {
        try {
            InFlight slot(in_flight_);
            return call();
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= config_.max_retries) throw;
        }
        std::this_thread::sleep_for(config_.backoff_base * (1 << attempt));
    }
}

LlmResponse LlmGateway::complete(const LlmRequest& req) {
    req.validate();
    if (!chat_) throw ConfigError("no chat provider configured");
    check_budget();
    LlmResponse resp = with_retries([&] { return chat_->complete(req); });
    if (resp.usage.input_tokens < 0 || resp.usage.output_tokens < 0)
        throw ProviderError("provider reported negative token counts", false);
    resp.cost = price_of(req.model_id, resp.usage);
    record(req.stage, req.model_id, resp.usage);
    return resp;
}

std::vector<std::vector<double>> LlmGateway::embed(Stage stage, std::span<const std::string> texts) {
    if (!embedder_) throw ConfigError("no embedder configured");
    if (texts.empty()) throw Error("embed: no texts");
    check_budget();
    EmbedResult res = with_retries([&] { return embedder_->embed(texts); });
    if (res.vectors.size() != texts.size())
        throw ProviderError("embedder returned " + std::to_string(res.vectors.size()) + " vectors for " +
                                std::to_string(texts.size()) + " texts",
                            false);
    for (const auto& v : res.vectors)
        if (v.size() != embedder_->dim()) throw ProviderError("embedding has wrong dimension", false);
    record(stage, embedder_->model_id(), Usage{res.input_tokens, 0});
    return std::move(res.vectors);
}

std::size_t LlmGateway::embedding_dim() const {
    if (!embedder_) throw ConfigError("no embedder configured");
    return embedder_->dim();
}

std::string LlmGateway::embedding_model() const {
    if (!embedder_) throw ConfigError("no embedder configured");
    return embedder_->model_id();
}

void LlmGateway::record(Stage stage, const std::string& model, const Usage& usage) {
    std::lock_guard lock(mu_);
    auto& c = counts_[{stage, model}];
    c.calls += 1;
    c.input_tokens += usage.input_tokens;
    c.output_tokens += usage.output_tokens;
}

UsageLedger LlmGateway::ledger_locked() const {
    UsageLedger out;
    for (const auto& [key, c] : counts_) {
        auto& u = out.stages[key.first];
        u.calls += c.calls;
        u.input_tokens += c.input_tokens;
        u.output_tokens += c.output_tokens;
        u.cost += price_of(key.second, Usage{c.input_tokens, c.output_tokens});
    }
    return out;
}

UsageLedger LlmGateway::ledger() const {
    std::lock_guard lock(mu_);
    return ledger_locked();
}

}  // namespace docrepair

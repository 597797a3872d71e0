#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "docrepair/common.hpp"

namespace docrepair {

/// Pipeline stage a call is billed to.
enum class Stage { doc_gen, retrieval, file_loc, func_loc, repair };

inline constexpr Stage kAllStages[] = {Stage::doc_gen, Stage::retrieval, Stage::file_loc,
                                       Stage::func_loc, Stage::repair};

std::string to_string(Stage stage);
Stage stage_from_string(std::string_view name);

struct Image {
    std::string mime = "image/png";
    std::string bytes;
};

struct Message {
    std::string role;  // "system", "user" or "assistant"
    std::string text;
    std::vector<Image> images;
};

struct LlmRequest {
    Stage stage = Stage::doc_gen;
    std::string model_id;
    std::vector<Message> messages;
    Temperature temperature;
    std::optional<std::int64_t> seed;

    /// Throws ConfigError when the request is malformed.
    void validate() const;
    /// Concatenated message text, used by matchers and token estimates.
    std::string joined_text() const;
};

/// sha256 over a canonical JSON rendering; images contribute their hash.
std::string request_digest(const LlmRequest& req);

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

struct LlmResponse {
    std::string text;
    Usage usage;
    double cost = 0.0;
};

class LlmError : public Error {
public:
    using Error::Error;
};

class ProviderError : public LlmError {
public:
    ProviderError(const std::string& what, bool retryable) : LlmError(what), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

class BudgetExceeded : public LlmError {
public:
    using LlmError::LlmError;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    /// cost is filled in by the gateway.
    virtual LlmResponse complete(const LlmRequest& req) = 0;
};

struct EmbedResult {
    std::vector<std::vector<double>> vectors;
    std::int64_t input_tokens = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string model_id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual EmbedResult embed(std::span<const std::string> texts) = 0;
};

struct Price {
    double input = 0.0;   // per token
    double output = 0.0;  // per token
};

struct StageUsage {
    std::int64_t calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double cost = 0.0;

    std::int64_t tokens() const { return input_tokens + output_tokens; }
};

struct UsageLedger {
    std::map<Stage, StageUsage> stages;

    const StageUsage& at(Stage s) const;
    std::int64_t total_tokens() const;
    double total_cost() const;
};

struct GatewayConfig {
    std::map<std::string, Price> prices;  // keyed by model id
    std::optional<double> cost_cap;
    int max_in_flight = 4;
    int max_retries = 2;
    std::chrono::milliseconds backoff_base{200};
};

/// Thread-safe front door for chat and embedding calls. Every call is
/// billed to a stage in the ledger.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<ChatProvider> chat, std::shared_ptr<Embedder> embedder,
               GatewayConfig config = {});

    LlmResponse complete(const LlmRequest& req);
    std::vector<std::vector<double>> embed(Stage stage, std::span<const std::string> texts);

    std::size_t embedding_dim() const;
    std::string embedding_model() const;
    UsageLedger ledger() const;
    const GatewayConfig& config() const { return config_; }

private:
    double price_of(const std::string& model, const Usage& usage) const;
    void check_budget() const;
    template <class F>
    auto with_retries(F&& call) -> decltype(call());

    std::shared_ptr<ChatProvider> chat_;
    std::shared_ptr<Embedder> embedder_;
    GatewayConfig config_;
    void record(Stage stage, const std::string& model, const Usage& usage);
    UsageLedger ledger_locked() const;

    mutable std::mutex mu_;
    // Costs are derived from integer token counts when the ledger is read,
    // so totals do not depend on the order in which calls finish.
    std::map<std::pair<Stage, std::string>, StageUsage> counts_;
    std::counting_semaphore<> in_flight_;
};

/// Offline provider answering from a rule table. A response depends only on
/// the request and the table.
class MockProvider : public ChatProvider {
public:
    struct Rule {
        std::optional<std::string> digest;
        std::optional<Stage> stage;
        std::optional<std::string> model;
        std::optional<Temperature> temperature;
        std::vector<std::string> contains;  // all must occur in the joined text
        std::string response;
        std::optional<Usage> usage;
    };
    using Handler = std::function<std::optional<std::string>(const LlmRequest&)>;

    MockProvider() = default;
    explicit MockProvider(std::vector<Rule> rules, std::optional<std::string> fallback = {});

    /// Script format: {"rules": [{"digest"?, "stage"?, "model"?, "temperature"?,
    /// "contains"?: str | [str], "response", "usage"?: {input, output}}], "default"?}
    static std::shared_ptr<MockProvider> from_script(const std::filesystem::path& path);

    void add_rule(Rule rule);
    void set_default(std::string response);
    /// Consulted before the rule table.
    void set_handler(Handler handler);

    LlmResponse complete(const LlmRequest& req) override;

    std::vector<std::string> seen_digests() const;
    std::size_t call_count() const;

private:
    mutable std::mutex mu_;
    std::vector<Rule> rules_;
    std::optional<std::string> fallback_;
    Handler handler_;
    std::vector<std::string> seen_;
};

/// Seeded feature-hashing projection of byte n-grams (n = 1..3), unit norm.
class StubEmbedder : public Embedder {
public:
    explicit StubEmbedder(std::size_t dim = 384, std::uint64_t seed = 0);

    std::string model_id() const override { return "stub-hash"; }
    std::size_t dim() const override { return dim_; }
    EmbedResult embed(std::span<const std::string> texts) override;

    std::vector<double> embed_one(std::string_view text) const;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct RemoteConfig {
    std::string base_url;           // e.g. https://api.example.com
    std::string api_key_env = "DOCREPAIR_API_KEY";
    std::string chat_path = "/v1/chat/completions";
    std::string embed_path = "/v1/embeddings";
    std::string embed_model;
    std::size_t embed_dim = 0;
    std::chrono::seconds timeout{120};
};

/// Chat and embedding client for vendor-compatible JSON endpoints.
class RemoteProvider : public ChatProvider, public Embedder {
public:
    explicit RemoteProvider(RemoteConfig config);

    LlmResponse complete(const LlmRequest& req) override;

    std::string model_id() const override { return config_.embed_model; }
    std::size_t dim() const override { return config_.embed_dim; }
    EmbedResult embed(std::span<const std::string> texts) override;

private:
    std::string post(const std::string& path, const std::string& body);

    RemoteConfig config_;
    std::string api_key_;
};

}  // namespace docrepair

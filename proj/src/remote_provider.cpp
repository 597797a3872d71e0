#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>

#include "docrepair/llm.hpp"

namespace docrepair {

namespace {

std::string base64(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("remote provider needs a base_url");
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string RemoteProvider::post(const std::string& path, const std::string& body) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) throw ProviderError("transport error: " + httplib::to_string(res.error()), true);
    if (res->status != 200)
        throw ProviderError("HTTP " + std::to_string(res->status) + " from " + path + ": " +
                                res->body.substr(0, 200),
                            retryable_status(res->status));
    return res->body;
}

LlmResponse RemoteProvider::complete(const LlmRequest& req) {
    nlohmann::json body;
    body["model"] = req.model_id;
    body["temperature"] = req.temperature.value();
    if (req.seed) body["seed"] = *req.seed;
    auto& msgs = body["messages"] = nlohmann::json::array();
    for (const auto& m : req.messages) {
        if (m.images.empty()) {
            msgs.push_back({{"role", m.role}, {"content", m.text}});
            continue;
        }
        nlohmann::json parts = nlohmann::json::array();
        parts.push_back({{"type", "text"}, {"text", m.text}});
        for (const auto& img : m.images)
            parts.push_back({{"type", "image_url"},
                             {"image_url", {{"url", "data:" + img.mime + ";base64," + base64(img.bytes)}}}});
        msgs.push_back({{"role", m.role}, {"content", parts}});
    }

    const std::string raw = post(config_.chat_path, body.dump());
    try {
        auto j = nlohmann::json::parse(raw);
        LlmResponse r;
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            r.usage.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            r.usage.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        } else {
            r.usage = Usage{estimate_tokens(req.joined_text()), estimate_tokens(r.text)};
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed chat response: ") + e.what(), false);
    }
}

EmbedResult RemoteProvider::embed(std::span<const std::string> texts) {
    if (config_.embed_model.empty() || config_.embed_dim == 0)
        throw ConfigError("remote embedding model not configured");
    nlohmann::json body;
    body["model"] = config_.embed_model;
    body["input"] = std::vector<std::string>(texts.begin(), texts.end());
    const std::string raw = post(config_.embed_path, body.dump());
    try {
        auto j = nlohmann::json::parse(raw);
        EmbedResult out;
        out.vectors.resize(texts.size());
        for (const auto& item : j.at("data")) {
            const auto idx = item.value("index", std::size_t{0});
            if (idx >= texts.size()) throw ProviderError("embedding index out of range", false);
            out.vectors[idx] = item.at("embedding").get<std::vector<double>>();
        }
        for (auto& v : out.vectors) {
            double norm = 0.0;
            for (double x : v) norm += x * x;
            if (norm == 0.0) throw ProviderError("zero embedding vector", false);
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        if (j.contains("usage")) out.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what(), false);
    }
}

}  // namespace docrepair

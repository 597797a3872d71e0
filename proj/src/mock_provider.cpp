#include <json.hpp>

#include "docrepair/llm.hpp"

namespace docrepair {

MockProvider::MockProvider(std::vector<Rule> rules, std::optional<std::string> fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

std::shared_ptr<MockProvider> MockProvider::from_script(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("mock script " + path.string() + ": " + e.what());
    }
    auto mock = std::make_shared<MockProvider>();
    try {
        for (const auto& r : j.value("rules", nlohmann::json::array())) {
            Rule rule;
            rule.response = r.at("response").get<std::string>();
            if (r.contains("digest")) rule.digest = r["digest"].get<std::string>();
            if (r.contains("stage")) rule.stage = stage_from_string(r["stage"].get<std::string>());
            if (r.contains("model")) rule.model = r["model"].get<std::string>();
            if (r.contains("temperature"))
                rule.temperature = Temperature::from_double(r["temperature"].get<double>());
            if (r.contains("contains")) {
                const auto& c = r["contains"];
                if (c.is_string())
                    rule.contains.push_back(c.get<std::string>());
                else
                    rule.contains = c.get<std::vector<std::string>>();
            }
            if (r.contains("usage"))
                rule.usage = Usage{r["usage"].value("input", std::int64_t{0}),
                                   r["usage"].value("output", std::int64_t{0})};
            mock->add_rule(std::move(rule));
        }
        if (j.contains("default")) mock->set_default(j["default"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("mock script " + path.string() + ": " + e.what());
    }
    return mock;
}

void MockProvider::add_rule(Rule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back(std::move(rule));
}

void MockProvider::set_default(std::string response) {
    std::lock_guard lock(mu_);
    fallback_ = std::move(response);
}

void MockProvider::set_handler(Handler handler) {
    std::lock_guard lock(mu_);
    handler_ = std::move(handler);
}

LlmResponse MockProvider::complete(const LlmRequest& req) {
    const std::string digest = request_digest(req);
    const std::string text = req.joined_text();
    Handler handler;
    {
        std::lock_guard lock(mu_);
        seen_.push_back(digest);
        handler = handler_;
    }
    auto respond = [&](std::string out, std::optional<Usage> usage) {
        LlmResponse r;
        r.usage = usage.value_or(Usage{estimate_tokens(text), estimate_tokens(out)});
        r.text = std::move(out);
        return r;
    };
    if (handler)
        if (auto out = handler(req)) return respond(std::move(*out), std::nullopt);

    std::lock_guard lock(mu_);
    for (const auto& rule : rules_) {
        if (rule.digest && *rule.digest != digest) continue;
        if (rule.stage && *rule.stage != req.stage) continue;
        if (rule.model && *rule.model != req.model_id) continue;
        if (rule.temperature && *rule.temperature != req.temperature) continue;
        bool all = true;
        for (const auto& needle : rule.contains)
            if (text.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        if (!all) continue;
        return respond(rule.response, rule.usage);
    }
    if (fallback_) return respond(*fallback_, std::nullopt);
    throw ProviderError("mock: no scripted response for " + to_string(req.stage) + " request " +
                            digest.substr(0, 12),
                        false);
}

std::vector<std::string> MockProvider::seen_digests() const {
    std::lock_guard lock(mu_);
    return seen_;
}

std::size_t MockProvider::call_count() const {
    std::lock_guard lock(mu_);
    return seen_.size();
}

}  // namespace docrepair

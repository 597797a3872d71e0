#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "docrepair/llm.hpp"
#include "docrepair/prompts.hpp"
#include "support.hpp"

using namespace docrepair;
using nlohmann::json;

namespace {

LlmRequest request(Stage stage, const std::string& text, const std::string& model = "m") {
    LlmRequest r;
    r.stage = stage;
    r.model_id = model;
    r.messages.push_back({"user", text, {}});
    return r;
}

class FlakyProvider : public ChatProvider {
public:
    FlakyProvider(int failures, bool retryable) : failures_(failures), retryable_(retryable) {}
    LlmResponse complete(const LlmRequest&) override {
        ++calls;
        if (calls <= failures_) throw ProviderError("try again", retryable_);
        return {"ok", {10, 5}, 0.0};
    }
    int calls = 0;

private:
    int failures_;
    bool retryable_;
};

}  // namespace

TEST(Digest, StableAndSensitive) {
    auto a = request(Stage::repair, "hello");
    auto b = a;
    EXPECT_EQ(request_digest(a), request_digest(b));
    b.temperature = Temperature(3);
    EXPECT_NE(request_digest(a), request_digest(b));
    b = a;
    b.stage = Stage::file_loc;
    EXPECT_NE(request_digest(a), request_digest(b));
    b = a;
    b.messages[0].images.push_back({"image/png", "bytes"});
    EXPECT_NE(request_digest(a), request_digest(b));
}

TEST(Mock, RulesMatchInOrder) {
    MockProvider mock;
    MockProvider::Rule r1;
    r1.stage = Stage::repair;
    r1.temperature = Temperature(2);
    r1.response = "warm";
    mock.add_rule(r1);
    MockProvider::Rule r2;
    r2.contains = {"needle", "thread"};
    r2.response = "both";
    mock.add_rule(r2);

    auto req = request(Stage::repair, "a needle and thread");
    EXPECT_EQ(mock.complete(req).text, "both");
    req.temperature = Temperature(2);
    EXPECT_EQ(mock.complete(req).text, "warm");
    EXPECT_THROW(mock.complete(request(Stage::repair, "needle only")), ProviderError);
    mock.set_default("fallback");
    EXPECT_EQ(mock.complete(request(Stage::repair, "needle only")).text, "fallback");
    EXPECT_EQ(mock.call_count(), 4u);
}

TEST(Mock, ScriptFile) {
    support::TempDir dir;
    write_file(dir / "s.json", json{{"rules",
                                     {{{"stage", "func_loc"}, {"contains", "x"}, {"response", "R"},
                                       {"usage", {{"input", 3}, {"output", 4}}}},
                                      {{"temperature", 0.5}, {"response", "half"}}}},
                                    {"default", "D"}}
                                       .dump());
    auto mock = MockProvider::from_script(dir / "s.json");
    const auto r = mock->complete(request(Stage::func_loc, "x"));
    EXPECT_EQ(r.text, "R");
    EXPECT_EQ(r.usage.input_tokens, 3);
    auto warm = request(Stage::doc_gen, "y");
    warm.temperature = Temperature(5);
    EXPECT_EQ(mock->complete(warm).text, "half");
    EXPECT_EQ(mock->complete(request(Stage::doc_gen, "y")).text, "D");

    write_file(dir / "bad.json", "{\"rules\": [{\"stage\": \"nowhere\", \"response\": \"\"}]}");
    EXPECT_THROW(MockProvider::from_script(dir / "bad.json"), Error);
}

TEST(Gateway, LedgerBillsStagesAndPrices) {
    auto mock = std::make_shared<MockProvider>();
    MockProvider::Rule r;
    r.response = "ok";
    r.usage = Usage{100, 10};
    mock->add_rule(r);
    GatewayConfig cfg;
    cfg.prices["big"] = {0.01, 0.02};
    LlmGateway llm(mock, std::make_shared<StubEmbedder>(16), cfg);
    EXPECT_DOUBLE_EQ(llm.complete(request(Stage::repair, "a", "big")).cost, 1.2);
    llm.complete(request(Stage::repair, "b", "free"));
    llm.complete(request(Stage::doc_gen, "c", "big"));
    const auto l = llm.ledger();
    EXPECT_EQ(l.at(Stage::repair).calls, 2);
    EXPECT_EQ(l.at(Stage::repair).input_tokens, 200);
    EXPECT_DOUBLE_EQ(l.at(Stage::repair).cost, 1.2);
    EXPECT_EQ(l.at(Stage::file_loc).calls, 0);
    EXPECT_EQ(l.total_tokens(), 330);
    EXPECT_DOUBLE_EQ(l.total_cost(), 2.4);

    const std::vector<std::string> texts{"x", "y"};
    EXPECT_EQ(llm.embed(Stage::retrieval, texts).size(), 2u);
    EXPECT_EQ(llm.ledger().at(Stage::retrieval).calls, 1);
    EXPECT_EQ(llm.ledger().at(Stage::retrieval).tokens(), 0);  // the stub reports no usage
}

TEST(Gateway, LedgerIndependentOfCompletionOrder) {
    auto run = [](bool reverse) {
        auto mock = std::make_shared<MockProvider>();
        mock->set_handler([](const LlmRequest& r) { return std::optional<std::string>(r.joined_text()); });
        GatewayConfig cfg;
        cfg.prices["m"] = {0.1, 0.3};
        LlmGateway llm(mock, nullptr, cfg);
        std::vector<std::string> texts;
        for (int i = 0; i < 40; ++i) texts.push_back(std::string(static_cast<std::size_t>(i * 7 % 23 + 1), 'q'));
        if (reverse) std::reverse(texts.begin(), texts.end());
        for (const auto& t : texts) llm.complete(request(Stage::func_loc, t));
        return llm.ledger().total_cost();
    };
    EXPECT_EQ(run(false), run(true));
}

TEST(Gateway, RetriesTransientFailures) {
    GatewayConfig cfg;
    cfg.backoff_base = std::chrono::milliseconds(1);
    auto flaky = std::make_shared<FlakyProvider>(2, true);
    LlmGateway llm(flaky, nullptr, cfg);
    EXPECT_EQ(llm.complete(request(Stage::repair, "x")).text, "ok");
    EXPECT_EQ(flaky->calls, 3);

    auto broken = std::make_shared<FlakyProvider>(3, true);
    LlmGateway llm2(broken, nullptr, cfg);
    EXPECT_THROW(llm2.complete(request(Stage::repair, "x")), ProviderError);
    EXPECT_EQ(broken->calls, 3);

    auto fatal = std::make_shared<FlakyProvider>(1, false);
    LlmGateway llm3(fatal, nullptr, cfg);
    EXPECT_THROW(llm3.complete(request(Stage::repair, "x")), ProviderError);
    EXPECT_EQ(fatal->calls, 1);
    EXPECT_EQ(llm3.ledger().at(Stage::repair).calls, 0);
}

TEST(Gateway, CostCapStopsFurtherCalls) {
    auto mock = std::make_shared<MockProvider>();
    MockProvider::Rule r;
    r.response = "ok";
    r.usage = Usage{10, 0};
    mock->add_rule(r);
    GatewayConfig cfg;
    cfg.prices["m"] = {1.0, 0.0};
    cfg.cost_cap = 25.0;
    LlmGateway llm(mock, nullptr, cfg);
    llm.complete(request(Stage::repair, "1"));
    llm.complete(request(Stage::repair, "2"));
    llm.complete(request(Stage::repair, "3"));  // 20 spent before this call
    EXPECT_THROW(llm.complete(request(Stage::repair, "4")), BudgetExceeded);
    EXPECT_EQ(mock->call_count(), 3u);
}

TEST(Gateway, BoundsConcurrentCalls) {
    std::atomic<int> active{0}, peak{0};
    auto mock = std::make_shared<MockProvider>();
    mock->set_handler([&](const LlmRequest&) {
        const int now = ++active;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --active;
        return std::optional<std::string>("ok");
    });
    GatewayConfig cfg;
    cfg.max_in_flight = 2;
    LlmGateway llm(mock, nullptr, cfg);
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&, i] { llm.complete(request(Stage::doc_gen, std::to_string(i))); });
    threads.clear();
    EXPECT_LE(peak.load(), 2);
    EXPECT_EQ(llm.ledger().at(Stage::doc_gen).calls, 8);
}

TEST(Gateway, RejectsMalformedRequests) {
    LlmGateway llm(std::make_shared<MockProvider>(), nullptr);
    LlmRequest r;
    r.model_id = "m";
    EXPECT_THROW(llm.complete(r), ConfigError);
    EXPECT_THROW(llm.embed(Stage::retrieval, std::vector<std::string>{"x"}), ConfigError);
}

TEST(StubEmbedder, DeterministicUnitNorm) {
    StubEmbedder e(64, 3), same(64, 3), other(64, 4);
    const auto v = e.embed_one("parse the config file");
    double norm = 0;
    for (double x : v) norm += x * x;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-12);
    EXPECT_EQ(v, same.embed_one("parse the config file"));
    EXPECT_NE(v, other.embed_one("parse the config file"));

    const std::vector<std::string> texts{"a", "bb", "", "parse the config file"};
    const auto batch = e.embed(texts);
    ASSERT_EQ(batch.vectors.size(), 4u);
    EXPECT_EQ(batch.vectors[3], v);
    EXPECT_EQ(batch.input_tokens, 0);
    double n2 = 0;
    for (double x : batch.vectors[2]) n2 += x * x;
    EXPECT_NEAR(n2, 1.0, 1e-12);
}

TEST(StubEmbedder, SimilarTextsScoreHigher) {
    StubEmbedder e(384);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    const auto q = e.embed_one("date picker renders wrong month");
    EXPECT_GT(dot(q, e.embed_one("renders the date picker month grid")),
              dot(q, e.embed_one("websocket reconnect backoff")));
}

TEST(Remote, ChatAndEmbeddingsOverHttp) {
    httplib::Server server;
    json last_chat;
    std::atomic<int> chat_calls{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (++chat_calls == 1) {
            res.status = 503;
            return;
        }
        last_chat = json::parse(req.body);
        EXPECT_EQ(req.get_header_value("Authorization"), "Bearer sekret");
        res.set_content(json{{"choices", {{{"message", {{"content", "patched"}}}}}},
                             {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}}
                            .dump(),
                        "application/json");
    });
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        json data = json::array();
        const auto n = body["input"].size();
        for (std::size_t i = n; i-- > 0;) data.push_back({{"index", i}, {"embedding", {3.0 * (i + 1), 4.0 * (i + 1)}}});
        res.set_content(json{{"data", data}, {"usage", {{"prompt_tokens", 7}}}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread loop([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("DOCREPAIR_TEST_KEY", "sekret", 1);
    RemoteConfig rc;
    rc.base_url = "http://127.0.0.1:" + std::to_string(port);
    rc.api_key_env = "DOCREPAIR_TEST_KEY";
    rc.embed_model = "emb";
    rc.embed_dim = 2;
    rc.timeout = std::chrono::seconds(5);
    auto remote = std::make_shared<RemoteProvider>(rc);
    GatewayConfig cfg;
    cfg.backoff_base = std::chrono::milliseconds(1);
    LlmGateway llm(remote, remote, cfg);

    auto req = request(Stage::repair, "fix it", "gpt");
    req.temperature = Temperature(4);
    req.seed = 9;
    req.messages[0].images.push_back({"image/png", "abc"});
    const auto r = llm.complete(req);
    EXPECT_EQ(r.text, "patched");
    EXPECT_EQ(chat_calls.load(), 2);
    EXPECT_EQ(llm.ledger().at(Stage::repair).input_tokens, 12);
    EXPECT_EQ(last_chat["model"], "gpt");
    EXPECT_DOUBLE_EQ(last_chat["temperature"].get<double>(), 0.4);
    EXPECT_EQ(last_chat["seed"], 9);
    EXPECT_EQ(last_chat["messages"][0]["content"][1]["image_url"]["url"], "data:image/png;base64,YWJj");

    const auto vecs = llm.embed(Stage::retrieval, std::vector<std::string>{"a", "b"});
    ASSERT_EQ(vecs.size(), 2u);
    EXPECT_NEAR(vecs[0][0], 0.6, 1e-12);
    EXPECT_NEAR(vecs[1][1], 0.8, 1e-12);
    EXPECT_EQ(llm.ledger().at(Stage::retrieval).input_tokens, 7);

    server.stop();
    loop.join();
    rc.base_url = "http://127.0.0.1:" + std::to_string(port);
    rc.timeout = std::chrono::seconds(1);
    RemoteProvider down(rc);
    try {
        down.complete(request(Stage::repair, "x"));
        FAIL() << "expected a transport error";
    } catch (const ProviderError& e) {
        EXPECT_TRUE(e.retryable());
    }
}

TEST(Prompts, RenderAndOverride) {
    EXPECT_EQ(render_template("a {{x}} b {{ y }}", {{"x", "1"}, {"y", "{{x}}"}}), "a 1 b {{x}}");
    EXPECT_THROW(render_template("{{missing}}", {}), ConfigError);

    PromptSet defaults;
    const auto doc = defaults.render("function_doc", {{"path", "p.py"},
                                                      {"unit_name", "f"},
                                                      {"signature", "def f(x):"},
                                                      {"context", "function in p.py"},
                                                      {"dependencies", "g"},
                                                      {"source", "def f(x):\n    return g(x)\n"}});
    EXPECT_NE(doc.find("def f(x):\n    return g(x)\n"), std::string::npos);
    for (const char* marker : {"### PARAMETERS", "### DESCRIPTION", "### USAGE NOTES", "### OUTPUT EXAMPLES"})
        EXPECT_NE(doc.find(marker), std::string::npos) << marker;

    support::TempDir dir;
    write_file(dir / "repair.txt", "Fix {{path}} for {{query}}: {{code}}");
    const auto custom = PromptSet::with_overrides(dir.path());
    EXPECT_EQ(custom.render("repair", {{"path", "a"}, {"query", "q"}, {"code", "c"}}), "Fix a for q: c");
    EXPECT_EQ(custom.get("file_doc"), defaults.get("file_doc"));
    EXPECT_THROW(PromptSet::with_overrides(dir / "nope"), ConfigError);
}

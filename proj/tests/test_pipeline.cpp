#include <gtest/gtest.h>

#include "docrepair/pipeline.hpp"
#include "support.hpp"

using namespace docrepair;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kMini = support::fixture("minirepo");

struct MiniRun {
    RunConfig config = RunConfig::load(kMini / "config.json");
    IssueBundle issue = load_issue(kMini / "issue.json");

    IssueReport run(const std::string& mock_script = {}) {
        RunContext ctx{config, make_providers(config, mock_script)};
        return run_issue(issue, kMini / "repo", ctx);
    }
};

IssueReport eval_report(const std::string& id, const std::string& status, std::vector<std::string> files,
                        int rounds = 1) {
    IssueReport r;
    r.issue_id = id;
    r.repo = id.substr(0, id.find('-'));
    r.status = status;
    r.files = std::move(files);
    r.rounds = rounds;
    if (!r.files.empty()) r.units[r.files.front()] = {"f"};
    return r;
}

}  // namespace

TEST(Config, RejectsUnknownKeysAndBadRanges) {
    EXPECT_THROW(RunConfig::from_json(json{{"k_retreive", 5}}), ConfigError);
    EXPECT_THROW(RunConfig::from_json(json{{"k_files", 0}}), ConfigError);
    EXPECT_THROW(RunConfig::from_json(json{{"ssim_threshold", 1.5}}), ConfigError);
    EXPECT_THROW(RunConfig::from_json(json{{"ablations", {{"disable_everything", true}}}}), ConfigError);
    EXPECT_THROW(RunConfig::from_json(json{{"provider", {{"kind", "carrier-pigeon"}}}}), ConfigError);
    EXPECT_THROW(RunConfig::from_json(json::array()), ConfigError);

    const auto c = RunConfig::from_json(json{{"k_files", 3}, {"test_cmd", "make test"},
                                             {"test_cmds", {{"web", "npm test"}}},
                                             {"provider", {{"mock_script", "m.json"}}}},
                                        "/base");
    EXPECT_EQ(c.k_files, 3u);
    EXPECT_EQ(c.k_retrieve, 50u);
    EXPECT_EQ(c.max_loc_rounds, 3);
    EXPECT_EQ(c.test_cmd_for("web"), "npm test");
    EXPECT_EQ(c.test_cmd_for("other"), "make test");
    EXPECT_EQ(fs::path(c.provider.mock_script), fs::path("/base/m.json"));
    EXPECT_THROW(RunConfig{}.test_cmd_for("x"), ConfigError);

    RunConfig a;
    a.ablate("fr");
    a.ablate("cp");
    EXPECT_TRUE(a.ablations.disable_retrieval && a.ablations.disable_pruning && !a.ablations.disable_docs);
    EXPECT_THROW(a.ablate("xx"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
    const auto c = RunConfig::load(kMini / "config.json");
    const auto again = RunConfig::from_json(c.to_json());
    EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(Query, RawTextThenMediaAnalysis) {
    EXPECT_EQ(combined_query({{"bug text", QueryOrigin::raw_issue}}).text, "bug text");
    EXPECT_EQ(combined_query({{"bug text", QueryOrigin::raw_issue}, {"the button is red", QueryOrigin::llm_textualization}})
                  .text,
              "bug text\n\nAnalysis of the attached media:\nthe button is red");
}

TEST(EndToEnd, MiniRepoResolvesDeterministically) {
    MiniRun mini;
    const auto t0 = std::chrono::steady_clock::now();
    const auto first = mini.run();
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(10));
    ASSERT_EQ(first.status, "resolved") << first.error;
    EXPECT_EQ(first.files, (std::vector<std::string>{"calc/ops.py"}));
    EXPECT_EQ(first.units.at("calc/ops.py"), (std::vector<std::string>{"add"}));
    EXPECT_EQ(first.rounds, 1);
    ASSERT_TRUE(first.repair && first.repair->temperature_used);
    EXPECT_EQ(*first.repair->temperature_used, Temperature(0));
    EXPECT_NE(first.diff.find("-    return a - b\n+    return a + b\n"), std::string::npos);
    EXPECT_EQ(first.ledger.at(Stage::doc_gen).calls, 9);
    EXPECT_EQ(first.ledger.at(Stage::file_loc).calls, 1);
    EXPECT_EQ(first.ledger.at(Stage::func_loc).calls, 1);
    EXPECT_EQ(first.ledger.at(Stage::repair).calls, 1);
    EXPECT_GT(first.ledger.total_cost(), 0.0);
    EXPECT_NE(read_file(kMini / "repo/calc/ops.py").find("return a - b"), std::string::npos);

    const auto second = mini.run();
    EXPECT_EQ(second.to_json().dump(), first.to_json().dump());
}

TEST(EndToEnd, AblationsChangeTheRightStages) {
    MiniRun mini;
    mini.config.ablate("doc");
    const auto no_docs = mini.run();
    EXPECT_EQ(no_docs.status, "resolved") << no_docs.error;
    EXPECT_EQ(no_docs.ledger.at(Stage::doc_gen).calls, 0);
    EXPECT_EQ(no_docs.ledger.at(Stage::retrieval).calls, 0);
    EXPECT_TRUE(no_docs.retrieved.empty());
    EXPECT_EQ(no_docs.candidates, 3u);

    MiniRun fr;
    fr.config.ablate("fr");
    const auto no_retrieval = fr.run();
    EXPECT_EQ(no_retrieval.status, "resolved");
    EXPECT_EQ(no_retrieval.ledger.at(Stage::doc_gen).calls, 9);
    EXPECT_TRUE(no_retrieval.retrieved.empty());

    MiniRun cp;
    cp.config.ablate("cp");
    const auto no_prune = cp.run();
    EXPECT_EQ(no_prune.status, "resolved");
}

TEST(EndToEnd, ProviderFailureAbortsTheIssue) {
    MiniRun mini;
    support::TempDir dir;
    write_file(dir / "empty.json", R"({"rules": []})");
    const auto rep = mini.run((dir / "empty.json").string());
    EXPECT_EQ(rep.status, "aborted");
    EXPECT_FALSE(rep.error.empty());
}

TEST(EndToEnd, CostCapAbortsTheIssue) {
    MiniRun mini;
    mini.config.cost_cap = 1e-9;
    const auto rep = mini.run();
    EXPECT_EQ(rep.status, "aborted");
}

TEST(EndToEnd, LocalizeThenRepairMatchesFullRun) {
    MiniRun mini;
    RunContext loc_ctx{mini.config, make_providers(mini.config)};
    loc_ctx.localize_only = true;
    const auto loc = run_issue(mini.issue, kMini / "repo", loc_ctx);
    EXPECT_EQ(loc.status, "localized");
    EXPECT_FALSE(loc.ledger.stages.count(Stage::repair));

    RunContext rep_ctx{mini.config, make_providers(mini.config)};
    const auto rep = repair_issue(mini.issue, kMini / "repo", IssueReport::from_json(loc.to_json()), rep_ctx);
    const auto full = mini.run();
    EXPECT_EQ(rep.status, "resolved");
    EXPECT_EQ(rep.diff, full.diff);
    EXPECT_EQ(rep.ledger.at(Stage::doc_gen).calls, 9);
    EXPECT_EQ(rep.ledger.at(Stage::repair).calls, 1);
}

TEST(Reports, PersistAndLoad) {
    MiniRun mini;
    const auto rep = mini.run();
    support::TempDir dir;
    persist_report(rep, dir.path());
    for (const char* f : {"report.json", "localization.json", "patch.txt", "patch.diff", "runtime.json"})
        EXPECT_TRUE(fs::exists(dir / "calc-1" / f)) << f;
    const auto runtime = json::parse(read_file(dir / "calc-1/runtime.json"));
    EXPECT_TRUE(runtime.contains("wall_time_ms"));
    EXPECT_FALSE(json::parse(read_file(dir / "calc-1/report.json")).contains("wall_time_ms"));
    const auto loaded = load_reports(dir.path());
    ASSERT_EQ(loaded.size(), 1u);
    EXPECT_EQ(loaded[0].to_json(), rep.to_json());
}

TEST(Eval, IssueIdsSortNumerically) {
    std::vector<std::string> ids{"b-10", "a-2", "b-9", "a-10", "a-1"};
    std::sort(ids.begin(), ids.end(), issue_id_less);
    EXPECT_EQ(ids, (std::vector<std::string>{"a-1", "a-2", "a-10", "b-9", "b-10"}));
}

TEST(Eval, SubsetContainment) {
    EXPECT_TRUE(localization_correct({"a.py", "b.py"}, {"a.py"}));
    EXPECT_TRUE(localization_correct({"b.py", "a.py"}, {"a.py", "b.py"}));
    EXPECT_FALSE(localization_correct({"a.py"}, {"a.py", "b.py"}));
    EXPECT_FALSE(localization_correct({}, {"a.py"}));
}

TEST(Eval, FixtureCountsMatchHandTally) {
    const fs::path root = support::fixture("eval");
    const auto reports = load_reports(root / "out");
    ASSERT_EQ(reports.size(), 10u);
    EXPECT_EQ(reports.back().issue_id, "beta-10");
    const auto s = eval(reports, load_gold(root / "gold.json"));
    EXPECT_EQ(s.issues, 10u);
    EXPECT_EQ(s.resolved, 5u);
    EXPECT_DOUBLE_EQ(s.resolved_pct, 50.0);
    EXPECT_EQ(s.localization_evaluated, 10u);
    EXPECT_EQ(s.correct_localization, 6u);
    EXPECT_DOUBLE_EQ(s.correct_file_localization_pct, 60.0);
    EXPECT_NEAR(s.total_cost, 0.55, 1e-12);
    EXPECT_NEAR(s.avg_cost, 0.055, 1e-12);
    EXPECT_NEAR(s.one_round_pct, 75.0, 1e-12);
    EXPECT_NEAR(s.avg_rounds, 1.375, 1e-12);
    EXPECT_EQ(s.per_repo.at("alpha").resolved, 3u);
    EXPECT_EQ(s.per_repo.at("alpha").correct_localization, 3u);
    EXPECT_EQ(s.per_repo.at("beta").resolved, 2u);
    EXPECT_EQ(s.per_repo.at("beta").correct_localization, 3u);
    EXPECT_TRUE(s.missing_gold.empty());
}

TEST(Eval, MissingGoldIsListedNotCounted) {
    const std::vector<IssueReport> reports{eval_report("x-1", "resolved", {"a.py"}),
                                           eval_report("x-2", "exhausted", {"b.py"})};
    const auto s = eval(reports, {{"x-1", {"a.py"}}});
    EXPECT_EQ(s.missing_gold, (std::vector<std::string>{"x-2"}));
    EXPECT_EQ(s.localization_evaluated, 1u);
    EXPECT_EQ(s.correct_localization, 1u);
    EXPECT_DOUBLE_EQ(s.resolved_pct, 50.0);
}

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "docrepair/docs.hpp"
#include "docrepair/llm.hpp"
#include "docrepair/localizer.hpp"
#include "docrepair/media.hpp"
#include "docrepair/retrieval.hpp"
#include "docrepair/validator.hpp"

namespace docrepair {

struct Ablations {
    bool disable_retrieval = false;
    bool disable_docs = false;
    bool disable_pruning = false;
};

struct ProviderConfig {
    std::string kind = "mock";  // "mock" or "remote"
    std::string mock_script;    // mock: rule table file
    RemoteConfig remote;
    std::size_t embed_dim = 384;  // stub embedder
    std::uint64_t embed_seed = 0;
};

struct RunConfig {
    std::string doc_model = "doc-model";
    std::string loc_model = "loc-model";
    std::string repair_model = "repair-model";
    std::string vision_model = "vision-model";
    std::optional<std::int64_t> seed = 42;
    std::size_t k_retrieve = 50;
    std::size_t k_files = 5;
    int max_loc_rounds = 3;
    double ssim_threshold = 0.95;
    std::chrono::milliseconds timeout{60'000};
    std::size_t cap_n = 8;
    int workers = 4;
    Ablations ablations;
    std::map<std::string, Price> prices;
    std::optional<double> cost_cap;  // per issue
    int concurrency = 4;
    int max_retries = 2;
    std::chrono::milliseconds backoff{200};
    std::string test_cmd;
    std::map<std::string, std::string> test_cmds;  // per repository, overrides test_cmd
    std::size_t context_budget_tokens = 0;
    bool document_unitless_files = true;
    std::string prompts_dir;
    ProviderConfig provider;

    /// Unknown keys and bad values raise ConfigError. Relative paths are
    /// resolved against `base_dir`.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& file);
    nlohmann::json to_json() const;

    std::string test_cmd_for(const std::string& repo) const;
    GatewayConfig gateway_config() const;
    /// Applies "fr", "doc" or "cp".
    void ablate(const std::string& name);
};

struct Providers {
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<Embedder> embedder;
};

/// Mock or remote providers as configured; `mock_script` overrides the config.
Providers make_providers(const RunConfig& config, const std::string& mock_script = {});

struct IssueReport {
    std::string issue_id;
    std::string repo;
    std::string status;  // resolved, not_localized, exhausted, aborted
    std::string error;
    std::vector<Query> queries;
    std::vector<ScoredFile> retrieved;
    std::size_t candidates = 0;
    std::vector<std::string> files;
    std::map<std::string, std::vector<std::string>> units;
    std::vector<std::string> whole_files;
    int rounds = 0;
    std::vector<std::string> diagnostics;
    std::optional<RepairOutcome> repair;
    std::string patch;  // Search/Replace blocks of the selected combination
    std::string diff;   // the same change as a unified diff
    UsageLedger ledger;
    std::chrono::milliseconds wall_time{0};

    /// Everything except timings and test output, so identical runs
    /// serialize identically.
    nlohmann::json to_json() const;
    static IssueReport from_json(const nlohmann::json& j);
};

struct RunContext {
    const RunConfig& config;
    Providers providers;
    /// Documentation carried between issues of one repository.
    DocStore* docs = nullptr;
    const PromptSet* prompts = nullptr;
    /// Stop after localization; the report status is then "localized".
    bool localize_only = false;
};

/// Raw issue text, followed by the media analysis when there is one.
Query combined_query(const std::vector<Query>& queries);

/// Algorithm for one issue. Provider failures yield status "aborted".
IssueReport run_issue(const IssueBundle& issue, const std::filesystem::path& repo_root, RunContext& ctx);

/// Repair step only, starting from a saved localization report.
IssueReport repair_issue(const IssueBundle& issue, const std::filesystem::path& repo_root,
                         const IssueReport& localization, RunContext& ctx);

/// Writes report.json, localization.json, patch.txt, patch.diff and
/// runtime.json under out_dir/<issue id>/.
void persist_report(const IssueReport& report, const std::filesystem::path& out_dir);

/// Numeric-aware ordering of issue ids ("x-9" before "x-10").
bool issue_id_less(const std::string& a, const std::string& b);

class MissingGold : public Error {
public:
    using Error::Error;
};

struct RepoSummary {
    std::size_t issues = 0;
    std::size_t resolved = 0;
    std::size_t localization_evaluated = 0;
    std::size_t correct_localization = 0;
    double total_cost = 0.0;
};

struct EvalSummary {
    std::size_t issues = 0;
    std::size_t resolved = 0;
    double resolved_pct = 0.0;
    std::size_t localization_evaluated = 0;
    std::size_t correct_localization = 0;
    double correct_file_localization_pct = 0.0;
    double avg_cost = 0.0;
    double total_cost = 0.0;
    std::map<std::string, RepoSummary> per_repo;
    std::map<int, std::size_t> rounds_histogram;
    double one_round_pct = 0.0;
    double avg_rounds = 0.0;
    std::vector<std::string> missing_gold;

    nlohmann::json to_json() const;
};

/// Correct localization: F_s contains every gold file.
bool localization_correct(const std::vector<std::string>& files, const std::set<std::string>& gold);

EvalSummary eval(const std::vector<IssueReport>& reports, const std::map<std::string, std::set<std::string>>& gold);

std::map<std::string, std::set<std::string>> load_gold(const std::filesystem::path& file);
std::vector<IssueReport> load_reports(const std::filesystem::path& out_dir);

/// Command-line entry point; returns the process exit status.
int run_cli(int argc, char** argv);

}  // namespace docrepair

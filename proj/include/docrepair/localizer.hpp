#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "docrepair/code_model.hpp"
#include "docrepair/docs.hpp"
#include "docrepair/llm.hpp"
#include "docrepair/media.hpp"
#include "docrepair/prompts.hpp"

namespace docrepair {

inline constexpr std::string_view kFilesSentinel = "SUSPICIOUS FILES:";
inline constexpr std::string_view kUnitsSentinel = "RELEVANT UNITS:";

struct LocalizerOptions {
    std::string model_id;
    std::optional<std::int64_t> seed;
    std::size_t k_files = 5;
    int max_rounds = 3;
    /// Split file localization into several prompts when the candidate
    /// block exceeds this many estimated tokens. 0 disables chunking.
    std::size_t context_budget_tokens = 0;
    /// false: file localization sees paths and the structure tree; unit
    /// localization sees skeletons for Python and is skipped for JS/TS.
    bool use_docs = true;
    const PromptSet* prompts = nullptr;
};

struct LocalizationResult {
    std::vector<std::string> candidates;  // what file localization chose from
    std::vector<std::string> files;       // F_s, most suspicious first
    std::map<std::string, std::vector<std::string>> units;  // N_s
    std::set<std::string> whole_files;    // repaired without unit pruning
    int rounds = 0;
    std::vector<std::string> diagnostics;

    /// Files of F_s that carry localized units or are repaired whole.
    std::vector<std::string> repair_targets() const;
};

struct NotLocalized {
    int rounds = 0;
    std::vector<std::vector<std::string>> attempts;  // F_s of each round
    std::vector<std::string> diagnostics;
};

using LocalizeOutcome = std::variant<LocalizationResult, NotLocalized>;

/// Items of `candidates` named one per line after `sentinel` (or anywhere
/// when the sentinel is missing), in order of first mention.
std::vector<std::string> parse_listed(std::string_view text, std::string_view sentinel,
                                      const std::vector<std::string>& candidates);

std::vector<std::string> localize_files(const std::vector<std::string>& candidates, const Query& query,
                                        const DocStore& store, const RepoSnapshot& snapshot, LlmGateway& llm,
                                        const LocalizerOptions& options,
                                        const std::vector<std::string>& excluded = {});

/// One call per file. Files without surviving units are left out. Files in
/// `whole_files` (if given) are those whose unit step was skipped.
std::map<std::string, std::vector<std::string>> localize_units(
    const std::vector<std::string>& files, const Query& query, const DocStore& store, const RepoSnapshot& snapshot,
    LlmGateway& llm, const LocalizerOptions& options, std::vector<std::string>* diagnostics = nullptr,
    std::set<std::string>* whole_files = nullptr);

LocalizeOutcome localize(const std::vector<std::string>& candidates, const Query& query, const DocStore& store,
                         const RepoSnapshot& snapshot, LlmGateway& llm, const LocalizerOptions& options);

/// Python-style outline of a file's units, used when docs are disabled.
std::string skeleton(const RepoSnapshot& snapshot, const std::string& path);

}  // namespace docrepair

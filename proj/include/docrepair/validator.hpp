#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "docrepair/code_model.hpp"
#include "docrepair/llm.hpp"
#include "docrepair/localizer.hpp"
#include "docrepair/media.hpp"
#include "docrepair/patch.hpp"
#include "docrepair/prompts.hpp"

namespace docrepair {

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    std::chrono::milliseconds duration{0};
    std::string output;  // stdout and stderr interleaved, capped
};

/// Runs `sh -c command` in `cwd` in its own process group. On timeout the
/// whole group is killed.
CommandResult run_command(const std::string& command, const std::filesystem::path& cwd,
                          std::chrono::milliseconds timeout, std::size_t max_output = 1 << 20);

class WorkspaceError : public Error {
public:
    using Error::Error;
};

class WorkspaceFactory {
public:
    virtual ~WorkspaceFactory() = default;
    /// A fresh copy of the original repository state.
    virtual std::filesystem::path materialize(const std::string& tag) = 0;
    virtual void release(const std::filesystem::path& workspace) = 0;
};

/// Copies the repository into a new directory under `scratch_root` per call.
class CopyWorkspaceFactory : public WorkspaceFactory {
public:
    CopyWorkspaceFactory(std::filesystem::path repo_root, std::filesystem::path scratch_root = {},
                         bool keep = false);
    ~CopyWorkspaceFactory() override;

    std::filesystem::path materialize(const std::string& tag) override;
    void release(const std::filesystem::path& workspace) override;

    const std::filesystem::path& scratch_root() const { return scratch_; }

private:
    std::filesystem::path repo_;
    std::filesystem::path scratch_;
    bool keep_;
    bool owns_scratch_ = false;
    std::mutex mu_;
    std::size_t counter_ = 0;
};

struct PatchCombination {
    std::vector<FilePatch> members;  // sorted by path

    std::size_t size() const { return members.size(); }
    std::vector<std::string> paths() const;
};

struct Enumeration {
    std::vector<PatchCombination> combinations;
    bool capped = false;
    std::string diagnostic;
};

/// Non-empty subsets by ascending size, then by sorted member paths. Above
/// cap_n files only sizes 1, 2 and n are produced.
Enumeration enumerate_combinations(const std::map<std::string, FilePatch>& patches, std::size_t cap_n = 8);

enum class ValidationStatus { pass, fail, timeout, apply_error };

std::string to_string(ValidationStatus status);

struct ValidationOutcome {
    std::size_t combination = 0;
    ValidationStatus status = ValidationStatus::fail;
    std::chrono::milliseconds duration{0};
    int exit_code = -1;
    std::string output_digest;
    std::string output_tail;
    std::string error;  // apply or workspace failure
};

struct ValidationConfig {
    std::string test_cmd;
    std::chrono::milliseconds timeout{60'000};
    int workers = 4;
};

/// Each combination runs in its own workspace; failures never abort the batch.
std::vector<ValidationOutcome> validate_batch(const std::vector<PatchCombination>& combinations,
                                              WorkspaceFactory& workspaces, const ValidationConfig& config);

/// Index of the passing combination touching the fewest files; ties go to
/// the lexicographically smallest sorted path list.
std::optional<std::size_t> select_minimal(const std::vector<PatchCombination>& combinations,
                                          const std::vector<ValidationOutcome>& outcomes);

struct FileAttempt {
    std::string path;
    std::string status;  // "patched", "no_edits", "apply_error", "unknown_unit"
    std::string detail;
    std::size_t edits = 0;
};

struct RepairIteration {
    Temperature temperature;
    std::vector<FileAttempt> files;
    std::size_t combinations = 0;
    bool capped = false;
    std::vector<ValidationOutcome> outcomes;
};

enum class RepairStatus { resolved, not_localized, exhausted, aborted };

std::string to_string(RepairStatus status);

struct RepairOutcome {
    RepairStatus status = RepairStatus::exhausted;
    std::optional<PatchCombination> selected;
    std::optional<Temperature> temperature_used;
    int iterations = 0;
    std::vector<RepairIteration> log;
};

struct RepairOptions {
    std::string model_id;
    std::optional<std::int64_t> seed;
    ValidationConfig validation;
    std::size_t cap_n = 8;
    bool prune = true;
    int max_iterations = 10;  // temperatures 0.0 .. 0.9
    const PromptSet* prompts = nullptr;
};

/// Per temperature step: one patch request per localized file, then joint
/// validation of all combinations. Provider failures propagate.
RepairOutcome repair_loop(const LocalizationResult& localization, const RepoSnapshot& snapshot, const Query& query,
                          LlmGateway& llm, WorkspaceFactory& workspaces, const RepairOptions& options);

/// Search/Replace rendering and unified diff of a combination against the snapshot.
std::string render_combination(const PatchCombination& combination);
std::string diff_combination(const PatchCombination& combination, const RepoSnapshot& snapshot);

}  // namespace docrepair

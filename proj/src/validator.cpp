#include "docrepair/validator.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <thread>

#include "docrepair/pruner.hpp"

namespace docrepair {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

CommandResult run_command(const std::string& command, const fs::path& cwd, std::chrono::milliseconds timeout,
                          std::size_t max_output) {
    int fds[2];
    if (pipe2(fds, O_CLOEXEC) != 0) throw WorkspaceError(std::string("pipe: ") + std::strerror(errno));
    const std::string dir = cwd.string();
    const auto start = Clock::now();
    const pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw WorkspaceError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        setpgid(0, 0);
        const int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, 0);
        dup2(fds[1], 1);
        dup2(fds[1], 2);
        if (chdir(dir.c_str()) != 0) _exit(127);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    close(fds[1]);
    fcntl(fds[0], F_SETFL, fcntl(fds[0], F_GETFL) | O_NONBLOCK);

    CommandResult result;
    auto drain = [&] {
        char buf[4096];
        for (;;) {
            const ssize_t n = read(fds[0], buf, sizeof buf);
            if (n <= 0) return n == 0;  // true at EOF
            const std::size_t room = max_output > result.output.size() ? max_output - result.output.size() : 0;
            result.output.append(buf, std::min(room, static_cast<std::size_t>(n)));
        }
    };

    const auto deadline = start + timeout;
    int status = 0;
    bool exited = false;
    while (!exited) {
        const auto now = Clock::now();
        if (now >= deadline) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd p{fds[0], POLLIN, 0};
        poll(&p, 1, static_cast<int>(std::min<long long>(left + 1, 50)));
        drain();
        const pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) exited = true;
    }
    // Background children may still hold the pipe; they die with the group.
    kill(-pid, SIGKILL);
    drain();
    close(fds[0]);
    result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    if (!result.timed_out) {
        if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
        else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

CopyWorkspaceFactory::CopyWorkspaceFactory(fs::path repo_root, fs::path scratch_root, bool keep)
    : repo_(std::move(repo_root)), scratch_(std::move(scratch_root)), keep_(keep) {
    if (!fs::is_directory(repo_)) throw WorkspaceError("repository not found: " + repo_.string());
    if (scratch_.empty()) {
        std::string tmpl = (fs::temp_directory_path() / "docrepair-ws-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw WorkspaceError(std::string("mkdtemp: ") + std::strerror(errno));
        scratch_ = tmpl;
        owns_scratch_ = true;
    } else {
        fs::create_directories(scratch_);
    }
}

CopyWorkspaceFactory::~CopyWorkspaceFactory() {
    if (owns_scratch_ && !keep_) {
        std::error_code ec;
        fs::remove_all(scratch_, ec);
    }
}

fs::path CopyWorkspaceFactory::materialize(const std::string& tag) {
    std::size_t id;
    {
        std::lock_guard lock(mu_);
        id = counter_++;
    }
    const fs::path ws = scratch_ / (std::to_string(id) + "-" + tag);
    std::error_code ec;
    fs::remove_all(ws, ec);
    fs::create_directories(ws, ec);
    if (!ec)
        fs::copy(repo_, ws, fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
    if (ec) throw WorkspaceError("materialize " + ws.string() + ": " + ec.message());
    return ws;
}

void CopyWorkspaceFactory::release(const fs::path& workspace) {
    if (keep_) return;
    std::error_code ec;
    fs::remove_all(workspace, ec);
}

std::vector<std::string> PatchCombination::paths() const {
    std::vector<std::string> out;
    for (const auto& m : members) out.push_back(m.path);
    return out;
}

Enumeration enumerate_combinations(const std::map<std::string, FilePatch>& patches, std::size_t cap_n) {
    Enumeration out;
    std::vector<const FilePatch*> items;
    for (const auto& [_, p] : patches) items.push_back(&p);
    const std::size_t n = items.size();
    if (n == 0) return out;

    std::vector<std::size_t> sizes;
    if (n > cap_n) {
        out.capped = true;
        out.diagnostic = std::to_string(n) + " patched files exceed the cap of " + std::to_string(cap_n) +
                         "; enumerating sizes 1, 2 and " + std::to_string(n) + " only";
        for (std::size_t k : {std::size_t{1}, std::size_t{2}, n})
            if (k <= n && (sizes.empty() || sizes.back() < k)) sizes.push_back(k);
    } else {
        for (std::size_t k = 1; k <= n; ++k) sizes.push_back(k);
    }

    for (std::size_t k : sizes) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        for (;;) {
            PatchCombination c;
            for (std::size_t i : idx) c.members.push_back(*items[i]);
            out.combinations.push_back(std::move(c));
            // Advance to the next k-subset in lexicographic order.
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    return out;
}

std::string to_string(ValidationStatus status) {
    switch (status) {
        case ValidationStatus::pass: return "pass";
        case ValidationStatus::fail: return "fail";
        case ValidationStatus::timeout: return "timeout";
        case ValidationStatus::apply_error: return "apply_error";
    }
    return "unknown";
}

std::string to_string(RepairStatus status) {
    switch (status) {
        case RepairStatus::resolved: return "resolved";
        case RepairStatus::not_localized: return "not_localized";
        case RepairStatus::exhausted: return "exhausted";
        case RepairStatus::aborted: return "aborted";
    }
    return "unknown";
}

namespace {

ValidationOutcome validate_one(const PatchCombination& combo, std::size_t index, WorkspaceFactory& workspaces,
                               const ValidationConfig& config) {
    ValidationOutcome o;
    o.combination = index;
    const auto start = Clock::now();
    fs::path ws;
    try {
        ws = workspaces.materialize("c" + std::to_string(index));
    } catch (const Error& e) {
        o.status = ValidationStatus::fail;
        o.error = e.what();
        return o;
    }
    try {
        for (const auto& m : combo.members) {
            const fs::path file = ws / m.path;
            const std::string original = fs::exists(file) ? read_file(file) : std::string();
            write_file(file, apply_edits(original, m.edits));
        }
    } catch (const Error& e) {
        o.status = ValidationStatus::apply_error;
        o.error = e.what();
        o.duration = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
        workspaces.release(ws);
        return o;
    }
    try {
        const auto r = run_command(config.test_cmd, ws, config.timeout);
        o.exit_code = r.exit_code;
        o.duration = r.duration;
        o.output_digest = sha256_hex(r.output);
        o.output_tail = r.output.size() > 2000 ? r.output.substr(r.output.size() - 2000) : r.output;
        if (r.timed_out) o.status = ValidationStatus::timeout;
        else o.status = r.exit_code == 0 ? ValidationStatus::pass : ValidationStatus::fail;
    } catch (const Error& e) {
        o.status = ValidationStatus::fail;
        o.error = e.what();
    }
    workspaces.release(ws);
    return o;
}

}  // namespace

std::vector<ValidationOutcome> validate_batch(const std::vector<PatchCombination>& combinations,
                                              WorkspaceFactory& workspaces, const ValidationConfig& config) {
    if (config.test_cmd.empty()) throw ConfigError("no test command configured");
    std::vector<ValidationOutcome> out(combinations.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < combinations.size(); i = next++)
            out[i] = validate_one(combinations[i], i, workspaces, config);
    };
    const std::size_t n = std::min<std::size_t>(std::max(config.workers, 1), combinations.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    return out;
}

std::optional<std::size_t> select_minimal(const std::vector<PatchCombination>& combinations,
                                          const std::vector<ValidationOutcome>& outcomes) {
    std::optional<std::size_t> best;
    for (const auto& o : outcomes) {
        if (o.status != ValidationStatus::pass) continue;
        const auto& c = combinations.at(o.combination);
        if (!best) {
            best = o.combination;
            continue;
        }
        const auto& b = combinations[*best];
        if (c.size() < b.size() || (c.size() == b.size() && c.paths() < b.paths())) best = o.combination;
    }
    return best;
}

RepairOutcome repair_loop(const LocalizationResult& localization, const RepoSnapshot& snapshot, const Query& query,
                          LlmGateway& llm, WorkspaceFactory& workspaces, const RepairOptions& options) {
    static const PromptSet defaults;
    const PromptSet& prompts = options.prompts ? *options.prompts : defaults;
    const int iterations = std::clamp(options.max_iterations, 1, 10);

    RepairOutcome outcome;
    for (int step = 0; step < iterations; ++step) {
        RepairIteration it;
        it.temperature = Temperature(step);
        std::map<std::string, FilePatch> patches;

        for (const auto& path : localization.repair_targets()) {
            FileAttempt attempt{path, "patched", {}, 0};
            const bool whole = localization.whole_files.count(path) > 0;
            static const std::vector<std::string> kNone;
            const auto uit = localization.units.find(path);
            PrunedFile pruned;
            try {
                pruned = prune_file(snapshot, path, uit == localization.units.end() ? kNone : uit->second,
                                    options.prune && !whole);
            } catch (const UnknownUnit& e) {
                attempt.status = "unknown_unit";
                attempt.detail = e.what();
                it.files.push_back(std::move(attempt));
                continue;
            }
            LlmRequest req;
            req.stage = Stage::repair;
            req.model_id = options.model_id;
            req.temperature = it.temperature;
            req.seed = options.seed;
            req.messages.push_back(Message{
                "user", prompts.render("repair", {{"query", query.text}, {"path", path}, {"code", pruned.text}}), {}});
            const std::string reply = llm.complete(req).text;

            try {
                auto parsed = parse_edits(reply);
                auto found = parsed.edits.find(path);
                if (found == parsed.edits.end()) {
                    attempt.status = "no_edits";
                    attempt.detail = "no edits for this file";
                } else {
                    FilePatch patch{path, found->second, std::nullopt};
                    patch.resulting_text = apply_edits(snapshot.file(path).content, patch.edits);
                    attempt.edits = patch.edits.size();
                    patches.emplace(path, std::move(patch));
                }
            } catch (const NoEditsFound& e) {
                attempt.status = "no_edits";
                attempt.detail = e.what();
            } catch (const ApplyError& e) {
                attempt.status = "apply_error";
                attempt.detail = e.what();
            }
            it.files.push_back(std::move(attempt));
        }

        std::optional<std::size_t> chosen;
        Enumeration en;
        if (!patches.empty()) {
            en = enumerate_combinations(patches, options.cap_n);
            it.combinations = en.combinations.size();
            it.capped = en.capped;
            it.outcomes = validate_batch(en.combinations, workspaces, options.validation);
            chosen = select_minimal(en.combinations, it.outcomes);
        }
        outcome.log.push_back(std::move(it));
        outcome.iterations = step + 1;
        if (chosen) {
            outcome.status = RepairStatus::resolved;
            outcome.selected = std::move(en.combinations[*chosen]);
            outcome.temperature_used = Temperature(step);
            return outcome;
        }
    }
    outcome.status = RepairStatus::exhausted;
    return outcome;
}

std::string render_combination(const PatchCombination& combination) {
    EditMap edits;
    for (const auto& m : combination.members) edits[m.path] = m.edits;
    return render_edits(edits);
}

std::string diff_combination(const PatchCombination& combination, const RepoSnapshot& snapshot) {
    std::string out;
    for (const auto& m : combination.members) {
        const std::string& before = snapshot.file(m.path).content;
        const std::string after = m.resulting_text ? *m.resulting_text : apply_edits(before, m.edits);
        out += unified_diff(m.path, before, after);
    }
    return out;
}

}  // namespace docrepair

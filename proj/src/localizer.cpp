#include "docrepair/localizer.hpp"

#include <algorithm>
#include <cctype>

namespace docrepair {

namespace {

const PromptSet& prompts_of(const LocalizerOptions& options) {
    static const PromptSet defaults;
    return options.prompts ? *options.prompts : defaults;
}

LlmRequest make_request(Stage stage, const LocalizerOptions& options, std::string prompt) {
    LlmRequest req;
    req.stage = stage;
    req.model_id = options.model_id;
    req.temperature = Temperature(0);
    req.seed = options.seed;
    req.messages.push_back(Message{"user", std::move(prompt), {}});
    return req;
}

/// Strips list decoration: bullets, numbering, quotes, backticks, trailing "()" or ":".
std::string_view clean_item(std::string_view s) {
    s = trim(s);
    if (s.starts_with("- ") || s.starts_with("* ") || s.starts_with("+ ")) s = trim(s.substr(2));
    std::size_t digits = 0;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
    if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) s = trim(s.substr(digits + 1));
    auto strip = [&](char c) {
        while (s.size() >= 2 && s.front() == c && s.back() == c) s = trim(s.substr(1, s.size() - 2));
    };
    for (int pass = 0; pass < 2; ++pass) {
        strip('`');
        strip('"');
        strip('\'');
        if (s.ends_with(":")) s = trim(s.substr(0, s.size() - 1));
        if (s.ends_with("()")) s = trim(s.substr(0, s.size() - 2));
    }
    if (s.starts_with("./")) s.remove_prefix(2);
    return s;
}

bool is_anonymous_language(Language lang) { return lang == Language::javascript || lang == Language::typescript; }

std::string file_block(const std::string& path, const DocStore& store) {
    std::string out = "### FILE " + path + "\n";
    const DocEntry* e = store.find(path);
    const std::string doc = e ? render_file_doc(e->file_doc) : std::string();
    out += doc.empty() ? "(no documentation)" : doc;
    out += "\n\n";
    return out;
}

}  // namespace

std::vector<std::string> LocalizationResult::repair_targets() const {
    std::vector<std::string> out;
    for (const auto& f : files)
        if (units.count(f) || whole_files.count(f)) out.push_back(f);
    return out;
}

std::vector<std::string> parse_listed(std::string_view text, std::string_view sentinel,
                                      const std::vector<std::string>& candidates) {
    const std::set<std::string_view> known(candidates.begin(), candidates.end());
    std::string_view body = text;
    const auto at = text.rfind(sentinel);
    if (at != std::string_view::npos) body = text.substr(at + sentinel.size());
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (auto line : split_lines_keep(body)) {
        const auto item = clean_item(line);
        if (known.count(item) && seen.insert(std::string(item)).second) out.emplace_back(item);
    }
    return out;
}

std::string skeleton(const RepoSnapshot& snapshot, const std::string& path) {
    std::string out;
    auto it = snapshot.units.find(path);
    if (it == snapshot.units.end()) return out;
    for (const auto& u : it->second) {
        if (!u.top_level()) out += "    ";
        out += u.signature.empty() ? u.name : u.signature;
        out += '\n';
    }
    return out;
}

std::vector<std::string> localize_files(const std::vector<std::string>& candidates, const Query& query,
                                        const DocStore& store, const RepoSnapshot& snapshot, LlmGateway& llm,
                                        const LocalizerOptions& options, const std::vector<std::string>& excluded) {
    if (candidates.empty()) return {};

    std::string excluded_block;
    if (!excluded.empty()) {
        excluded_block = "\nThese files were already examined and found not to contain the relevant code:\n";
        for (const auto& f : excluded) excluded_block += f + "\n";
    }

    // Candidate blocks, grouped into chunks that fit the context budget.
    std::vector<std::vector<std::string>> chunks(1);
    std::size_t used = 0;
    for (const auto& path : candidates) {
        const std::size_t cost =
            options.use_docs ? static_cast<std::size_t>(estimate_tokens(file_block(path, store))) : 0;
        if (options.context_budget_tokens > 0 && used > 0 && used + cost > options.context_budget_tokens) {
            chunks.emplace_back();
            used = 0;
        }
        chunks.back().push_back(path);
        used += cost;
    }

    auto run_chunk = [&](const std::vector<std::string>& chunk) {
        std::string block;
        if (options.use_docs) {
            for (const auto& path : chunk) block += file_block(path, store);
        } else {
            for (const auto& path : chunk) block += path + "\n";
            block += "\nRepository structure:\n" + snapshot.tree.render();
        }
        const auto req = make_request(Stage::file_loc, options,
                                      prompts_of(options).render("file_localization",
                                                                 {{"query", query.text},
                                                                  {"candidates", block},
                                                                  {"excluded", excluded_block},
                                                                  {"k", std::to_string(options.k_files)}}));
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto listed = parse_listed(llm.complete(req).text, kFilesSentinel, chunk);
            if (!listed.empty()) return listed;
        }
        return std::vector<std::string>{};
    };

    std::vector<std::string> merged;
    std::set<std::string> seen;
    for (const auto& chunk : chunks)
        for (auto& p : run_chunk(chunk))
            if (seen.insert(p).second) merged.push_back(std::move(p));
    if (merged.size() > options.k_files) merged.resize(options.k_files);
    return merged;
}

std::map<std::string, std::vector<std::string>> localize_units(
    const std::vector<std::string>& files, const Query& query, const DocStore& store, const RepoSnapshot& snapshot,
    LlmGateway& llm, const LocalizerOptions& options, std::vector<std::string>* diagnostics,
    std::set<std::string>* whole_files) {
    std::vector<std::optional<std::vector<std::string>>> found(files.size());
    std::vector<std::string> errors(files.size());
    std::vector<char> whole(files.size(), 0);
    std::vector<char> budget_hit(files.size(), 0);

    const long n = static_cast<long>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::string& path = files[idx];
        const auto names = unit_names(snapshot, path);
        if (!options.use_docs && snapshot.files.count(path) &&
            is_anonymous_language(snapshot.file(path).language)) {
            whole[idx] = 1;
            found[idx] = names;
            continue;
        }
        std::string units_block;
        if (options.use_docs) {
            const DocEntry* e = store.find(path);
            for (const auto& name : names) {
                units_block += "### UNIT " + name + "\n";
                const FunctionDoc* doc = nullptr;
                if (e && e->unit_docs.count(name)) doc = &e->unit_docs.at(name);
                if (doc) units_block += render_function_doc(*doc);
                else units_block += snapshot.find_unit(path, name)->signature + "\n(no documentation)\n";
                units_block += "\n";
            }
        } else {
            units_block = skeleton(snapshot, path);
        }
        if (names.empty()) {
            found[idx] = std::vector<std::string>{};
            continue;
        }
        try {
            const auto req = make_request(Stage::func_loc, options,
                                          prompts_of(options).render("unit_localization", {{"query", query.text},
                                                                                           {"path", path},
                                                                                           {"units", units_block}}));
            const std::string text = llm.complete(req).text;
            // Accept "Class.method" as a mention of the class.
            std::vector<std::string> candidates = names;
            std::map<std::string, std::string> alias;
            if (snapshot.units.count(path))
                for (const auto& u : snapshot.units.at(path))
                    if (u.parent) {
                        const std::string dotted = *u.parent + "." + u.name;
                        candidates.push_back(dotted);
                        alias.emplace(dotted, *u.parent);
                    }
            std::vector<std::string> picked;
            std::set<std::string> seen;
            for (const auto& item : parse_listed(text, kUnitsSentinel, candidates)) {
                auto a = alias.find(item);
                const std::string name = a == alias.end() ? item : a->second;
                if (seen.insert(name).second) picked.push_back(name);
            }
            found[idx] = std::move(picked);
        } catch (const BudgetExceeded&) {
            budget_hit[idx] = 1;
        } catch (const Error& e) {
            errors[idx] = path + ": " + e.what();
        }
    }
    if (std::find(budget_hit.begin(), budget_hit.end(), 1) != budget_hit.end())
        throw BudgetExceeded("cost cap reached during unit localization");

    std::map<std::string, std::vector<std::string>> out;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!errors[i].empty() && diagnostics) diagnostics->push_back(errors[i]);
        if (whole[i]) {
            if (whole_files) whole_files->insert(files[i]);
            if (found[i] && !found[i]->empty()) out.emplace(files[i], *found[i]);
            continue;
        }
        if (found[i] && !found[i]->empty()) out.emplace(files[i], *found[i]);
    }
    return out;
}

LocalizeOutcome localize(const std::vector<std::string>& candidates, const Query& query, const DocStore& store,
                         const RepoSnapshot& snapshot, LlmGateway& llm, const LocalizerOptions& options) {
    if (options.max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
    NotLocalized failure;
    std::vector<std::string> excluded;
    for (int round = 1; round <= options.max_rounds; ++round) {
        auto files = localize_files(candidates, query, store, snapshot, llm, options, excluded);
        failure.rounds = round;
        failure.attempts.push_back(files);
        if (files.empty()) {
            failure.diagnostics.push_back("round " + std::to_string(round) + ": no suspicious files");
            return failure;
        }
        LocalizationResult result;
        result.units = localize_units(files, query, store, snapshot, llm, options, &result.diagnostics,
                                      &result.whole_files);
        if (!result.units.empty() || !result.whole_files.empty()) {
            result.candidates = candidates;
            result.files = std::move(files);
            result.rounds = round;
            return result;
        }
        failure.diagnostics.insert(failure.diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());
        failure.diagnostics.push_back("round " + std::to_string(round) + ": no suspicious units");
        for (auto& f : files)
            if (std::find(excluded.begin(), excluded.end(), f) == excluded.end()) excluded.push_back(std::move(f));
    }
    return failure;
}

}  // namespace docrepair

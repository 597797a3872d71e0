#include "docrepair/pipeline.hpp"

#include <algorithm>
#include <cctype>

namespace docrepair {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown key in " + where + ": " + key);
}

std::string resolve(const fs::path& base, const std::string& p) {
    if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

json ledger_json(const UsageLedger& ledger) {
    json stages = json::object();
    for (Stage s : kAllStages) {
        const auto& u = ledger.at(s);
        stages[to_string(s)] = {{"calls", u.calls},
                                {"input_tokens", u.input_tokens},
                                {"output_tokens", u.output_tokens},
                                {"cost", u.cost}};
    }
    return {{"stages", stages}, {"total_tokens", ledger.total_tokens()}, {"total_cost", ledger.total_cost()}};
}

UsageLedger ledger_from_json(const json& j) {
    UsageLedger l;
    for (const auto& [name, u] : j.at("stages").items()) {
        StageUsage s;
        s.calls = u.value("calls", std::int64_t{0});
        s.input_tokens = u.value("input_tokens", std::int64_t{0});
        s.output_tokens = u.value("output_tokens", std::int64_t{0});
        s.cost = u.value("cost", 0.0);
        l.stages[stage_from_string(name)] = s;
    }
    return l;
}

json repair_json(const RepairOutcome& r) {
    json log = json::array();
    for (const auto& it : r.log) {
        json files = json::array();
        for (const auto& f : it.files)
            files.push_back({{"path", f.path}, {"status", f.status}, {"detail", f.detail}, {"edits", f.edits}});
        json outcomes = json::array();
        for (const auto& o : it.outcomes)
            outcomes.push_back({{"combination", o.combination},
                                {"status", to_string(o.status)},
                                {"exit_code", o.exit_code},
                                {"error", o.error}});
        log.push_back({{"temperature", it.temperature.str()},
                       {"files", files},
                       {"combinations", it.combinations},
                       {"capped", it.capped},
                       {"outcomes", outcomes}});
    }
    return {{"status", to_string(r.status)},
            {"iterations", r.iterations},
            {"temperature_used", r.temperature_used ? json(r.temperature_used->str()) : json(nullptr)},
            {"selected", r.selected ? json(r.selected->paths()) : json(nullptr)},
            {"log", log}};
}

// The report keeps only the selected paths, so members come back without edits.
RepairOutcome repair_from_json(const json& j) {
    auto status_of = [](const std::string& s) {
        for (auto st : {RepairStatus::resolved, RepairStatus::not_localized, RepairStatus::exhausted, RepairStatus::aborted})
            if (to_string(st) == s) return st;
        throw IoError("unknown repair status '" + s + "'");
    };
    auto validation_of = [](const std::string& s) {
        for (auto st : {ValidationStatus::pass, ValidationStatus::fail, ValidationStatus::timeout,
                         ValidationStatus::apply_error})
            if (to_string(st) == s) return st;
        throw IoError("unknown validation status '" + s + "'");
    };
    auto temp = [](const json& t) { return Temperature::from_double(std::stod(t.get<std::string>())); };

    RepairOutcome r;
    r.status = status_of(j.at("status").get<std::string>());
    r.iterations = j.at("iterations").get<int>();
    if (!j.at("temperature_used").is_null()) r.temperature_used = temp(j["temperature_used"]);
    if (!j.at("selected").is_null()) {
        PatchCombination c;
        for (const auto& p : j["selected"]) c.members.push_back(FilePatch{p.get<std::string>(), {}, std::nullopt});
        r.selected = std::move(c);
    }
    for (const auto& it : j.at("log")) {
        RepairIteration ri;
        ri.temperature = temp(it.at("temperature"));
        ri.combinations = it.at("combinations").get<std::size_t>();
        ri.capped = it.at("capped").get<bool>();
        for (const auto& f : it.at("files"))
            ri.files.push_back({f.at("path").get<std::string>(), f.at("status").get<std::string>(),
                                f.at("detail").get<std::string>(), f.at("edits").get<std::size_t>()});
        for (const auto& o : it.at("outcomes")) {
            ValidationOutcome vo;
            vo.combination = o.at("combination").get<std::size_t>();
            vo.status = validation_of(o.at("status").get<std::string>());
            vo.exit_code = o.at("exit_code").get<int>();
            vo.error = o.at("error").get<std::string>();
            ri.outcomes.push_back(std::move(vo));
        }
        r.log.push_back(std::move(ri));
    }
    return r;
}

json localization_json(const IssueReport& r) {
    json queries = json::array();
    for (const auto& q : r.queries) queries.push_back({{"origin", to_string(q.origin)}, {"text", q.text}});
    json retrieved = json::array();
    for (const auto& f : r.retrieved) retrieved.push_back({{"path", f.path}, {"score", f.score}});
    json usage = json::object();
    for (Stage s : kAllStages) usage[to_string(s)] = r.ledger.at(s).tokens();
    return {{"issue_id", r.issue_id},
            {"queries", queries},
            {"retrieved", retrieved},
            {"candidates", r.candidates},
            {"files", r.files},
            {"units", r.units},
            {"whole_files", r.whole_files},
            {"rounds", r.rounds},
            {"tokens_by_stage", usage}};
}

void run_repair(IssueReport& rep, const LocalizationResult& loc, const RepoSnapshot& snapshot, const Query& query,
                LlmGateway& llm, const fs::path& repo_root, const std::string& test_cmd, const RunContext& ctx) {
    const RunConfig& cfg = ctx.config;
    CopyWorkspaceFactory workspaces(repo_root);
    RepairOptions ro;
    ro.model_id = cfg.repair_model;
    ro.seed = cfg.seed;
    ro.validation = ValidationConfig{test_cmd, cfg.timeout, cfg.workers};
    ro.cap_n = cfg.cap_n;
    ro.prune = !cfg.ablations.disable_pruning;
    ro.prompts = ctx.prompts;
    rep.repair = repair_loop(loc, snapshot, query, llm, workspaces, ro);
    rep.status = to_string(rep.repair->status);
    if (rep.repair->selected) {
        rep.patch = render_combination(*rep.repair->selected);
        rep.diff = diff_combination(*rep.repair->selected, snapshot);
    }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
    RunConfig c;
    try {
        reject_unknown(j,
                       {"models", "seed", "k_retrieve", "k_files", "max_loc_rounds", "ssim_threshold", "timeout_ms",
                        "cap_n", "workers", "ablations", "prices", "cost_cap", "concurrency", "max_retries",
                        "backoff_ms", "test_cmd", "test_cmds", "context_budget_tokens", "document_unitless_files",
                        "prompts_dir", "provider"},
                       "config");
        if (j.contains("models")) {
            const auto& m = j["models"];
            reject_unknown(m, {"doc_gen", "localization", "repair", "vision"}, "models");
            c.doc_model = get_or(m, "doc_gen", c.doc_model);
            c.loc_model = get_or(m, "localization", c.loc_model);
            c.repair_model = get_or(m, "repair", c.repair_model);
            c.vision_model = get_or(m, "vision", c.vision_model);
        }
        if (j.contains("seed")) c.seed = j["seed"].is_null() ? std::nullopt : std::optional(j["seed"].get<std::int64_t>());
        c.k_retrieve = get_or(j, "k_retrieve", c.k_retrieve);
        c.k_files = get_or(j, "k_files", c.k_files);
        c.max_loc_rounds = get_or(j, "max_loc_rounds", c.max_loc_rounds);
        c.ssim_threshold = get_or(j, "ssim_threshold", c.ssim_threshold);
        c.timeout = std::chrono::milliseconds(get_or<std::int64_t>(j, "timeout_ms", c.timeout.count()));
        c.cap_n = get_or(j, "cap_n", c.cap_n);
        c.workers = get_or(j, "workers", c.workers);
        if (j.contains("ablations")) {
            const auto& a = j["ablations"];
            reject_unknown(a, {"disable_retrieval", "disable_docs", "disable_pruning"}, "ablations");
            c.ablations.disable_retrieval = get_or(a, "disable_retrieval", false);
            c.ablations.disable_docs = get_or(a, "disable_docs", false);
            c.ablations.disable_pruning = get_or(a, "disable_pruning", false);
        }
        if (j.contains("prices"))
            for (const auto& [model, p] : j["prices"].items()) {
                reject_unknown(p, {"input", "output"}, "prices." + model);
                Price price{get_or(p, "input", 0.0), get_or(p, "output", 0.0)};
                if (price.input < 0 || price.output < 0) throw ConfigError("negative price for " + model);
                c.prices[model] = price;
            }
        if (j.contains("cost_cap") && !j["cost_cap"].is_null()) c.cost_cap = j["cost_cap"].get<double>();
        c.concurrency = get_or(j, "concurrency", c.concurrency);
        c.max_retries = get_or(j, "max_retries", c.max_retries);
        c.backoff = std::chrono::milliseconds(get_or<std::int64_t>(j, "backoff_ms", c.backoff.count()));
        c.test_cmd = get_or(j, "test_cmd", c.test_cmd);
        c.test_cmds = get_or(j, "test_cmds", c.test_cmds);
        c.context_budget_tokens = get_or(j, "context_budget_tokens", c.context_budget_tokens);
        c.document_unitless_files = get_or(j, "document_unitless_files", c.document_unitless_files);
        c.prompts_dir = resolve(base_dir, get_or(j, "prompts_dir", std::string()));
        if (j.contains("provider")) {
            const auto& p = j["provider"];
            reject_unknown(p,
                           {"kind", "mock_script", "base_url", "api_key_env", "chat_path", "embed_path",
                            "embed_model", "embed_dim", "timeout_s", "stub_dim", "stub_seed"},
                           "provider");
            c.provider.kind = get_or(p, "kind", c.provider.kind);
            c.provider.mock_script = resolve(base_dir, get_or(p, "mock_script", std::string()));
            auto& r = c.provider.remote;
            r.base_url = get_or(p, "base_url", r.base_url);
            r.api_key_env = get_or(p, "api_key_env", r.api_key_env);
            r.chat_path = get_or(p, "chat_path", r.chat_path);
            r.embed_path = get_or(p, "embed_path", r.embed_path);
            r.embed_model = get_or(p, "embed_model", r.embed_model);
            r.embed_dim = get_or(p, "embed_dim", r.embed_dim);
            r.timeout = std::chrono::seconds(get_or<std::int64_t>(p, "timeout_s", r.timeout.count()));
            c.provider.embed_dim = get_or(p, "stub_dim", c.provider.embed_dim);
            c.provider.embed_seed = get_or(p, "stub_seed", c.provider.embed_seed);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.k_retrieve < 1 || c.k_files < 1) throw ConfigError("k_retrieve and k_files must be at least 1");
    if (c.max_loc_rounds < 1) throw ConfigError("max_loc_rounds must be at least 1");
    if (!(c.ssim_threshold > 0.0 && c.ssim_threshold < 1.0)) throw ConfigError("ssim_threshold must lie in (0,1)");
    if (c.timeout.count() <= 0) throw ConfigError("timeout_ms must be positive");
    if (c.cap_n < 1) throw ConfigError("cap_n must be at least 1");
    if (c.workers < 1 || c.concurrency < 1) throw ConfigError("workers and concurrency must be at least 1");
    if (c.max_retries < 0) throw ConfigError("max_retries must not be negative");
    if (c.provider.kind != "mock" && c.provider.kind != "remote")
        throw ConfigError("provider.kind must be mock or remote");
    return c;
}

RunConfig RunConfig::load(const fs::path& file) {
    if (!fs::is_regular_file(file)) throw ConfigError("config file not found: " + file.string());
    json j;
    try {
        j = json::parse(read_file(file));
    } catch (const json::exception& e) {
        throw ConfigError("config " + file.string() + ": " + e.what());
    }
    return from_json(j, file.parent_path());
}

json RunConfig::to_json() const {
    json prices_j = json::object();
    for (const auto& [m, p] : prices) prices_j[m] = {{"input", p.input}, {"output", p.output}};
    return {{"models", {{"doc_gen", doc_model}, {"localization", loc_model}, {"repair", repair_model}, {"vision", vision_model}}},
            {"seed", seed ? json(*seed) : json(nullptr)},
            {"k_retrieve", k_retrieve},
            {"k_files", k_files},
            {"max_loc_rounds", max_loc_rounds},
            {"ssim_threshold", ssim_threshold},
            {"timeout_ms", timeout.count()},
            {"cap_n", cap_n},
            {"workers", workers},
            {"ablations",
             {{"disable_retrieval", ablations.disable_retrieval},
              {"disable_docs", ablations.disable_docs},
              {"disable_pruning", ablations.disable_pruning}}},
            {"prices", prices_j},
            {"cost_cap", cost_cap ? json(*cost_cap) : json(nullptr)},
            {"concurrency", concurrency},
            {"max_retries", max_retries},
            {"backoff_ms", backoff.count()},
            {"test_cmd", test_cmd},
            {"test_cmds", test_cmds},
            {"context_budget_tokens", context_budget_tokens},
            {"document_unitless_files", document_unitless_files},
            {"prompts_dir", prompts_dir}};
}

std::string RunConfig::test_cmd_for(const std::string& repo) const {
    auto it = test_cmds.find(repo);
    const std::string cmd = it != test_cmds.end() ? it->second : test_cmd;
    if (cmd.empty()) throw ConfigError("no test command configured for repository '" + repo + "'");
    return cmd;
}

GatewayConfig RunConfig::gateway_config() const {
    GatewayConfig g;
    g.prices = prices;
    g.cost_cap = cost_cap;
    g.max_in_flight = concurrency;
    g.max_retries = max_retries;
    g.backoff_base = backoff;
    return g;
}

void RunConfig::ablate(const std::string& name) {
    if (name == "fr") ablations.disable_retrieval = true;
    else if (name == "doc") ablations.disable_docs = true;
    else if (name == "cp") ablations.disable_pruning = true;
    else throw ConfigError("unknown ablation '" + name + "' (expected fr, doc or cp)");
}

Providers make_providers(const RunConfig& config, const std::string& mock_script) {
    Providers p;
    const std::string script = mock_script.empty() ? config.provider.mock_script : mock_script;
    if (!mock_script.empty() || config.provider.kind == "mock") {
        if (script.empty()) throw ConfigError("mock provider needs a mock script");
        if (!fs::is_regular_file(script)) throw ConfigError("mock script not found: " + script);
        p.chat = MockProvider::from_script(script);
        p.embedder = std::make_shared<StubEmbedder>(config.provider.embed_dim, config.provider.embed_seed);
        return p;
    }
    auto remote = std::make_shared<RemoteProvider>(config.provider.remote);
    p.chat = remote;
    if (!config.provider.remote.embed_model.empty()) p.embedder = remote;
    else p.embedder = std::make_shared<StubEmbedder>(config.provider.embed_dim, config.provider.embed_seed);
    return p;
}

json IssueReport::to_json() const {
    json j = localization_json(*this);
    j.erase("tokens_by_stage");
    j["repo"] = repo;
    j["status"] = status;
    j["error"] = error;
    j["diagnostics"] = diagnostics;
    j["repair"] = repair ? repair_json(*repair) : json(nullptr);
    j["ledger"] = ledger_json(ledger);
    return j;
}

IssueReport IssueReport::from_json(const json& j) {
    IssueReport r;
    try {
        r.issue_id = j.at("issue_id").get<std::string>();
        r.repo = j.value("repo", "");
        r.status = j.at("status").get<std::string>();
        r.error = j.value("error", "");
        for (const auto& q : j.value("queries", json::array()))
            r.queries.push_back({q.at("text").get<std::string>(), q.at("origin").get<std::string>() == "raw_issue"
                                                                      ? QueryOrigin::raw_issue
                                                                      : QueryOrigin::llm_textualization});
        for (const auto& f : j.value("retrieved", json::array()))
            r.retrieved.push_back({f.at("path").get<std::string>(), f.at("score").get<double>()});
        r.candidates = j.value("candidates", std::size_t{0});
        r.files = j.value("files", std::vector<std::string>{});
        r.units = j.value("units", std::map<std::string, std::vector<std::string>>{});
        r.whole_files = j.value("whole_files", std::vector<std::string>{});
        r.rounds = j.value("rounds", 0);
        r.diagnostics = j.value("diagnostics", std::vector<std::string>{});
        if (j.contains("repair") && !j["repair"].is_null()) r.repair = repair_from_json(j["repair"]);
        if (j.contains("ledger")) r.ledger = ledger_from_json(j["ledger"]);
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed report: ") + e.what());
    }
    return r;
}

Query combined_query(const std::vector<Query>& queries) {
    Query q;
    for (const auto& item : queries) {
        if (item.origin == QueryOrigin::raw_issue) {
            q.text = item.text + q.text;
        } else {
            q.text += "\n\nAnalysis of the attached media:\n" + item.text;
        }
    }
    return q;
}

IssueReport run_issue(const IssueBundle& issue, const fs::path& repo_root, RunContext& ctx) {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig& cfg = ctx.config;
    IssueReport rep;
    rep.issue_id = issue.id;
    rep.repo = issue.repo;
    const std::string test_cmd = cfg.test_cmd_for(issue.repo);
    LlmGateway llm(ctx.providers.chat, ctx.providers.embedder, cfg.gateway_config());
    DocStore scratch;
    DocStore& store = ctx.docs ? *ctx.docs : scratch;

    try {
        const RepoSnapshot snapshot = build_snapshot(repo_root);
        for (const auto& f : snapshot.parse_failures) rep.diagnostics.push_back("parse failure in " + f.path + ": " + f.reason);

        if (!cfg.ablations.disable_docs) {
            DocGenOptions o;
            o.model_id = cfg.doc_model;
            o.seed = cfg.seed;
            o.document_unitless_files = cfg.document_unitless_files;
            o.provenance = issue.id;
            o.prompts = ctx.prompts;
            store = gen_docs_incremental(snapshot, &store, llm, o);
            for (const auto& f : store.flagged())
                rep.diagnostics.push_back("documentation failed for " + f + ": " + *store.find(f)->error);
        }

        const bool use_retrieval = !cfg.ablations.disable_retrieval && !cfg.ablations.disable_docs;
        TextualizeOptions t;
        t.model_id = cfg.vision_model;
        t.seed = cfg.seed;
        t.ssim_threshold = cfg.ssim_threshold;
        t.stage = use_retrieval ? Stage::retrieval : Stage::file_loc;
        t.prompts = ctx.prompts;
        rep.queries = textualize_issue(issue, llm, t);

        std::vector<std::string> candidates;
        if (use_retrieval) {
            const auto index = build_index(store, llm);
            const auto result = retrieve(index, rep.queries, llm, cfg.k_retrieve);
            rep.retrieved = result.files;
            candidates = result.paths();
        } else {
            for (const auto& [path, _] : snapshot.files) candidates.push_back(path);
        }
        rep.candidates = candidates.size();

        LocalizerOptions lo;
        lo.model_id = cfg.loc_model;
        lo.seed = cfg.seed;
        lo.k_files = cfg.k_files;
        lo.max_rounds = cfg.max_loc_rounds;
        lo.context_budget_tokens = cfg.context_budget_tokens;
        lo.use_docs = !cfg.ablations.disable_docs;
        lo.prompts = ctx.prompts;
        const Query query = combined_query(rep.queries);
        const auto outcome = localize(candidates, query, store, snapshot, llm, lo);

        if (const auto* failed = std::get_if<NotLocalized>(&outcome)) {
            rep.status = to_string(RepairStatus::not_localized);
            rep.rounds = failed->rounds;
            if (!failed->attempts.empty()) rep.files = failed->attempts.back();
            rep.diagnostics.insert(rep.diagnostics.end(), failed->diagnostics.begin(), failed->diagnostics.end());
        } else {
            const auto& loc = std::get<LocalizationResult>(outcome);
            rep.files = loc.files;
            rep.units = loc.units;
            rep.whole_files.assign(loc.whole_files.begin(), loc.whole_files.end());
            rep.rounds = loc.rounds;
            rep.diagnostics.insert(rep.diagnostics.end(), loc.diagnostics.begin(), loc.diagnostics.end());

            if (ctx.localize_only) rep.status = "localized";
            else run_repair(rep, loc, snapshot, query, llm, repo_root, test_cmd, ctx);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        rep.status = to_string(RepairStatus::aborted);
        rep.error = e.what();
    }
    rep.ledger = llm.ledger();
    rep.wall_time =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return rep;
}

IssueReport repair_issue(const IssueBundle& issue, const fs::path& repo_root, const IssueReport& localization,
                         RunContext& ctx) {
    const auto start = std::chrono::steady_clock::now();
    IssueReport rep = localization;
    rep.issue_id = issue.id;
    rep.repo = issue.repo;
    rep.error.clear();
    rep.repair.reset();
    rep.patch.clear();
    rep.diff.clear();
    const std::string test_cmd = ctx.config.test_cmd_for(issue.repo);
    LlmGateway llm(ctx.providers.chat, ctx.providers.embedder, ctx.config.gateway_config());
    try {
        if (rep.files.empty() || (rep.units.empty() && rep.whole_files.empty())) {
            rep.status = to_string(RepairStatus::not_localized);
        } else {
            const RepoSnapshot snapshot = build_snapshot(repo_root);
            LocalizationResult loc;
            loc.files = rep.files;
            loc.units = rep.units;
            loc.whole_files.insert(rep.whole_files.begin(), rep.whole_files.end());
            loc.rounds = rep.rounds;
            run_repair(rep, loc, snapshot, combined_query(rep.queries), llm, repo_root, test_cmd, ctx);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        rep.status = to_string(RepairStatus::aborted);
        rep.error = e.what();
    }
    // Localization spend was recorded when the localization ran.
    UsageLedger total = llm.ledger();
    for (Stage s : kAllStages)
        if (s != Stage::repair) total.stages[s] = localization.ledger.at(s);
    rep.ledger = total;
    rep.wall_time =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return rep;
}

void persist_report(const IssueReport& report, const fs::path& out_dir) {
    const fs::path dir = out_dir / report.issue_id;
    write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    write_file(dir / "localization.json", localization_json(report).dump(2) + "\n");
    write_file(dir / "patch.txt", report.patch);
    write_file(dir / "patch.diff", report.diff);

    json outcomes = json::array();
    if (report.repair)
        for (const auto& it : report.repair->log)
            for (const auto& o : it.outcomes)
                outcomes.push_back({{"temperature", it.temperature.str()},
                                    {"combination", o.combination},
                                    {"duration_ms", o.duration.count()},
                                    {"output_digest", o.output_digest},
                                    {"output_tail", o.output_tail}});
    write_file(dir / "runtime.json",
               json{{"wall_time_ms", report.wall_time.count()}, {"validations", outcomes}}.dump(2) + "\n");
}

bool issue_id_less(const std::string& a, const std::string& b) {
    auto split = [](const std::string& s) {
        std::size_t i = s.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
        return std::pair<std::string, std::string>(s.substr(0, i), s.substr(i));
    };
    auto [pa, na] = split(a);
    auto [pb, nb] = split(b);
    if (pa != pb || na.empty() || nb.empty()) return a < b;
    auto strip = [](std::string n) {
        n.erase(0, std::min(n.find_first_not_of('0'), n.size() - 1));
        return n;
    };
    na = strip(na);
    nb = strip(nb);
    if (na.size() != nb.size()) return na.size() < nb.size();
    if (na != nb) return na < nb;
    return a < b;
}

bool localization_correct(const std::vector<std::string>& files, const std::set<std::string>& gold) {
    const std::set<std::string> have(files.begin(), files.end());
    return std::includes(have.begin(), have.end(), gold.begin(), gold.end());
}

EvalSummary eval(const std::vector<IssueReport>& reports, const std::map<std::string, std::set<std::string>>& gold) {
    EvalSummary s;
    std::size_t localized = 0, round_sum = 0;
    for (const auto& r : reports) {
        auto& repo = s.per_repo[r.repo];
        ++s.issues;
        ++repo.issues;
        const double cost = r.ledger.total_cost();
        s.total_cost += cost;
        repo.total_cost += cost;
        if (r.status == to_string(RepairStatus::resolved)) {
            ++s.resolved;
            ++repo.resolved;
        }
        auto g = gold.find(r.issue_id);
        if (g == gold.end()) {
            s.missing_gold.push_back(r.issue_id);
        } else {
            ++s.localization_evaluated;
            ++repo.localization_evaluated;
            if (localization_correct(r.files, g->second)) {
                ++s.correct_localization;
                ++repo.correct_localization;
            }
        }
        if (!r.units.empty() || !r.whole_files.empty()) {
            ++localized;
            round_sum += static_cast<std::size_t>(r.rounds);
            ++s.rounds_histogram[r.rounds];
        }
    }
    auto pct = [](std::size_t num, std::size_t den) { return den ? 100.0 * static_cast<double>(num) / den : 0.0; };
    s.resolved_pct = pct(s.resolved, s.issues);
    s.correct_file_localization_pct = pct(s.correct_localization, s.localization_evaluated);
    s.avg_cost = s.issues ? s.total_cost / static_cast<double>(s.issues) : 0.0;
    s.one_round_pct = pct(s.rounds_histogram.count(1) ? s.rounds_histogram.at(1) : 0, localized);
    s.avg_rounds = localized ? static_cast<double>(round_sum) / static_cast<double>(localized) : 0.0;
    return s;
}

json EvalSummary::to_json() const {
    json repos = json::object();
    for (const auto& [name, r] : per_repo)
        repos[name] = {{"issues", r.issues},
                       {"resolved", r.resolved},
                       {"localization_evaluated", r.localization_evaluated},
                       {"correct_localization", r.correct_localization},
                       {"avg_cost", r.issues ? r.total_cost / static_cast<double>(r.issues) : 0.0}};
    json hist = json::object();
    for (const auto& [rounds, n] : rounds_histogram) hist[std::to_string(rounds)] = n;
    return {{"issues", issues},
            {"resolved", resolved},
            {"resolved_pct", resolved_pct},
            {"localization_evaluated", localization_evaluated},
            {"correct_localization", correct_localization},
            {"correct_file_localization_pct", correct_file_localization_pct},
            {"avg_cost", avg_cost},
            {"total_cost", total_cost},
            {"per_repo", repos},
            {"rounds", {{"histogram", hist}, {"one_round_pct", one_round_pct}, {"avg_rounds", avg_rounds}}},
            {"missing_gold", missing_gold}};
}

std::map<std::string, std::set<std::string>> load_gold(const fs::path& file) {
    try {
        return json::parse(read_file(file)).get<std::map<std::string, std::set<std::string>>>();
    } catch (const json::exception& e) {
        throw ConfigError("gold file " + file.string() + ": " + e.what());
    }
}

std::vector<IssueReport> load_reports(const fs::path& out_dir) {
    std::vector<IssueReport> out;
    if (!fs::is_directory(out_dir)) return out;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(out_dir))
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "report.json"))
            files.push_back(entry.path() / "report.json");
    for (const auto& f : files) {
        try {
            out.push_back(IssueReport::from_json(json::parse(read_file(f))));
        } catch (const json::exception& e) {
            throw IoError(f.string() + ": " + e.what());
        }
    }
    std::sort(out.begin(), out.end(),
              [](const IssueReport& a, const IssueReport& b) { return issue_id_less(a.issue_id, b.issue_id); });
    return out;
}

}  // namespace docrepair

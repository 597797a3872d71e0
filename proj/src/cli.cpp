#include <iostream>

#include <CLI11.hpp>

#include "docrepair/pipeline.hpp"

namespace docrepair {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
    std::string repo;
    std::vector<std::string> issues;
    std::string config;
    std::string out = "out";
    std::vector<std::string> ablate;
    std::string mock_script;
    std::string gold;
    bool force = false;
};

RunConfig load_config(const CliArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
    for (const auto& name : a.ablate) cfg.ablate(name);
    return cfg;
}

std::vector<IssueBundle> load_issues(const std::vector<std::string>& paths) {
    std::vector<IssueBundle> issues;
    for (const auto& p : paths) issues.push_back(load_issue(p));
    std::stable_sort(issues.begin(), issues.end(),
                     [](const IssueBundle& a, const IssueBundle& b) { return issue_id_less(a.id, b.id); });
    return issues;
}

DocStore load_store(const fs::path& dir) {
    return fs::is_regular_file(dir / "manifest.json") ? DocStore::load(dir) : DocStore{};
}

void print_report(const IssueReport& r) {
    std::cout << r.issue_id << ": " << r.status;
    if (!r.files.empty()) {
        std::cout << " files=";
        for (std::size_t i = 0; i < r.files.size(); ++i) std::cout << (i ? "," : "") << r.files[i];
    }
    std::cout << " rounds=" << r.rounds << " cost=" << r.ledger.total_cost();
    if (!r.error.empty()) std::cout << " error=" << r.error;
    std::cout << "\n";
}

int cmd_gen_docs(const CliArgs& a) {
    const RunConfig cfg = load_config(a);
    const auto prompts = cfg.prompts_dir.empty() ? PromptSet{} : PromptSet::with_overrides(cfg.prompts_dir);
    const Providers providers = make_providers(cfg, a.mock_script);
    LlmGateway llm(providers.chat, providers.embedder, cfg.gateway_config());
    const fs::path store_dir = fs::path(a.out) / "docstore";
    const DocStore prev = load_store(store_dir);
    const RepoSnapshot snapshot = build_snapshot(a.repo);
    DocGenOptions o;
    o.model_id = cfg.doc_model;
    o.seed = cfg.seed;
    o.force = a.force;
    o.document_unitless_files = cfg.document_unitless_files;
    o.provenance = "gen-docs";
    o.prompts = &prompts;
    DocGenStats stats;
    const DocStore store = gen_docs_incremental(snapshot, &prev, llm, o, &stats);
    store.save(store_dir);
    std::cout << "documented " << store.size() << " files: " << stats.reused << " reused, " << stats.regenerated
              << " regenerated, " << stats.failed << " failed; cost " << llm.ledger().total_cost() << "\n";
    for (const auto& f : store.flagged()) std::cerr << "warning: " << f << ": " << *store.find(f)->error << "\n";
    return stats.failed ? 1 : 0;
}

int cmd_issues(const CliArgs& a, bool localize_only, bool repair_only) {
    const RunConfig cfg = load_config(a);
    const auto prompts = cfg.prompts_dir.empty() ? PromptSet{} : PromptSet::with_overrides(cfg.prompts_dir);
    const Providers providers = make_providers(cfg, a.mock_script);
    const fs::path out(a.out);
    const fs::path store_dir = out / "docstore";
    DocStore store = load_store(store_dir);
    RunContext ctx{cfg, providers, &store, &prompts, localize_only};

    int rc = 0;
    for (const auto& issue : load_issues(a.issues)) {
        IssueReport report;
        if (repair_only) {
            const fs::path saved = out / issue.id / "report.json";
            if (!fs::is_regular_file(saved))
                throw ConfigError("no saved localization for " + issue.id + " (run localize first)");
            report = repair_issue(issue, a.repo, IssueReport::from_json(json::parse(read_file(saved))), ctx);
        } else {
            report = run_issue(issue, a.repo, ctx);
        }
        persist_report(report, out);
        print_report(report);
        if (report.status == "aborted") rc = 1;
    }
    if (!repair_only && !cfg.ablations.disable_docs) store.save(store_dir);
    return rc;
}

int cmd_eval(const CliArgs& a) {
    const auto reports = load_reports(a.out);
    if (reports.empty()) {
        std::cerr << "error: no reports under " << a.out << "\n";
        return 1;
    }
    const auto summary = eval(reports, load_gold(a.gold));
    write_file(fs::path(a.out) / "summary.json", summary.to_json().dump(2) + "\n");
    std::cout << "issues " << summary.issues << "\n"
              << "resolved " << summary.resolved << " (" << summary.resolved_pct << "%)\n"
              << "correct file localization " << summary.correct_localization << "/"
              << summary.localization_evaluated << " (" << summary.correct_file_localization_pct << "%)\n"
              << "average cost " << summary.avg_cost << "\n"
              << "one-round localization " << summary.one_round_pct << "%, average rounds " << summary.avg_rounds
              << "\n";
    for (const auto& id : summary.missing_gold) std::cerr << "warning: no gold files for " << id << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Documentation-guided repository repair"};
    app.require_subcommand(1);
    CliArgs a;

    auto add_common = [&](CLI::App* sub, bool needs_issue) {
        sub->add_option("--repo", a.repo, "Repository root")->required()->check(CLI::ExistingDirectory);
        if (needs_issue)
            sub->add_option("--issue", a.issues, "Issue bundle (repeatable)")->required()->check(CLI::ExistingFile);
        sub->add_option("--config", a.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "Output directory")->capture_default_str();
        sub->add_option("--ablate", a.ablate, "Disable a component: fr, doc or cp (repeatable)")
            ->check(CLI::IsMember({"fr", "doc", "cp"}));
        sub->add_option("--mock-script", a.mock_script, "Use the scripted mock provider")->check(CLI::ExistingFile);
    };

    auto* gen = app.add_subcommand("gen-docs", "Generate or refresh the documentation store");
    add_common(gen, false);
    gen->add_flag("--force", a.force, "Regenerate every file");
    auto* loc = app.add_subcommand("localize", "Localize issues without repairing them");
    add_common(loc, true);
    auto* rep = app.add_subcommand("repair", "Repair issues from their saved localization");
    add_common(rep, true);
    auto* run = app.add_subcommand("run", "Localize and repair issues");
    add_common(run, true);
    auto* ev = app.add_subcommand("eval", "Summarize saved reports against gold files");
    ev->add_option("--out", a.out, "Directory holding per-issue reports")->required();
    ev->add_option("--gold", a.gold, "JSON map of issue id to gold files")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_docs(a);
        if (loc->parsed()) return cmd_issues(a, true, false);
        if (rep->parsed()) return cmd_issues(a, false, true);
        if (run->parsed()) return cmd_issues(a, false, false);
        return cmd_eval(a);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace docrepair

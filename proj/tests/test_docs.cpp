#include <gtest/gtest.h>

#include <mutex>

#include "docrepair/docs.hpp"
#include "support.hpp"

using namespace docrepair;

namespace {

std::vector<SourceFile> package(int n_files, int changed = -1) {
    std::vector<SourceFile> files;
    for (int i = 0; i < n_files; ++i) {
        const std::string tag = std::to_string(i);
        std::string src = "import os\n\n\ndef load" + tag + "(p):\n    return parse" + tag + "(p)\n\n\ndef parse" +
                          tag + "(p):\n    return p.strip()\n";
        if (i == changed) src += "\n\nclass Extra" + tag + ":\n    pass\n";
        files.push_back(SourceFile::from_content("pkg/mod" + tag + ".py", src));
    }
    return files;
}

DocGenOptions options() {
    DocGenOptions o;
    o.model_id = "doc";
    o.provenance = "test";
    return o;
}

std::set<std::string> prompted_paths(const std::vector<std::string>& prompts) {
    std::set<std::string> out;
    for (const auto& p : prompts) {
        const auto at = p.find("File: ");
        out.insert(p.substr(at + 6, p.find('\n', at) - at - 6));
    }
    return out;
}

}  // namespace

TEST(FunctionDocParse, Sections) {
    const auto d = parse_function_doc("f", "intro\n### PARAMETERS\nx: int\n### DESCRIPTION\nAdds one.\nTwice.\n"
                                           "### USAGE NOTES\n\n### OUTPUT EXAMPLES\nf(1) == 2\n");
    ASSERT_TRUE(d);
    EXPECT_EQ(d->parameters, "x: int");
    EXPECT_EQ(d->description, "Adds one.\nTwice.");
    EXPECT_EQ(d->usage_notes, "none");
    EXPECT_EQ(d->output_examples, "f(1) == 2");
    EXPECT_FALSE(parse_function_doc("f", "### PARAMETERS\nx\n"));
    EXPECT_FALSE(parse_function_doc("f", "### DESCRIPTION\n   \n"));
}

TEST(FunctionDocGen, FallsBackAfterRetry) {
    auto mock = std::make_shared<MockProvider>();
    mock->set_default("Just prose without headers.");
    LlmGateway llm(mock, nullptr);
    const auto snap = snapshot_from_files(package(1));
    const CodeUnit* u = snap.find_unit("pkg/mod0.py", "load0");
    const auto d = gen_function_doc(*u, "def load0(p): ...", {"pkg/mod0.py", u->signature, "", {}}, llm, options());
    EXPECT_TRUE(d.fallback);
    EXPECT_EQ(d.description, "Just prose without headers.");
    EXPECT_EQ(mock->call_count(), 2u);
}

TEST(FunctionDocGen, PromptCarriesSourceAndMetadata) {
    std::vector<std::string> prompts;
    std::mutex mu;  // doc generation runs files in parallel
    const auto snap = snapshot_from_files(package(1));
    auto rec = std::make_shared<MockProvider>();
    rec->set_handler([&](const LlmRequest& r) -> std::optional<std::string> {
        std::lock_guard lock(mu);
        prompts.push_back(r.joined_text());
        return std::nullopt;
    });
    rec->set_default("### DESCRIPTION\nx\n### ARCHITECTURAL ROLE\ny\n");
    LlmGateway llm(rec, nullptr);
    gen_docs_incremental(snap, nullptr, llm, options());
    ASSERT_EQ(prompts.size(), 3u);
    const auto& load_prompt = *std::find_if(prompts.begin(), prompts.end(),
                                            [](const std::string& p) { return p.find("Unit: load0") != std::string::npos; });
    EXPECT_NE(load_prompt.find("def load0(p):\n    return parse0(p)\n"), std::string::npos);
    EXPECT_NE(load_prompt.find("Units it depends on: parse0"), std::string::npos);
    EXPECT_NE(load_prompt.find("function in pkg/mod0.py"), std::string::npos);
    const auto& file_prompt = *std::find_if(prompts.begin(), prompts.end(), [](const std::string& p) {
        return p.find("### ARCHITECTURAL ROLE") != std::string::npos;
    });
    EXPECT_NE(file_prompt.find("mod0.py    <== current file"), std::string::npos);
    EXPECT_NE(file_prompt.find("import os"), std::string::npos);
}

TEST(FileDocGen, SummariesFallBackToDescriptions) {
    auto mock = std::make_shared<MockProvider>();
    mock->set_default("### SUMMARY a\nFirst.\n### ARCHITECTURAL ROLE\nGlue code.\n");
    LlmGateway llm(mock, nullptr);
    std::map<std::string, FunctionDoc> docs{{"a", {"a", "none", "Does a.", "none", "none", false}},
                                            {"b", {"b", "none", "Does b.", "none", "none", false}}};
    StructureTree tree;
    tree.add_file("x.py");
    const auto d = gen_file_doc("x.py", {"a", "b"}, docs, tree, "", llm, options());
    EXPECT_EQ(d.architectural_role, "Glue code.");
    ASSERT_EQ(d.summaries.size(), 2u);
    EXPECT_EQ(d.summaries[0].second, "First.");
    EXPECT_EQ(d.summaries[1].second, "Does b.");
    EXPECT_THROW(gen_file_doc("x.py", {"a", "c"}, docs, tree, "", llm, options()), MissingUnitDocs);
}

TEST(Incremental, OnlyChangedFileIsRegenerated) {
    const auto before = snapshot_from_files(package(20));
    auto mock = support::doc_mock();
    LlmGateway first(mock, nullptr);
    DocGenStats stats;
    const DocStore store = gen_docs_incremental(before, nullptr, first, options(), &stats);
    EXPECT_EQ(store.size(), 20u);
    EXPECT_EQ(stats.regenerated, 20u);
    EXPECT_EQ(first.ledger().at(Stage::doc_gen).calls, 20 * 3);

    const auto after = snapshot_from_files(package(20, 7));
    std::vector<std::string> prompts;
    std::mutex mu;  // doc generation runs files in parallel
    auto rec = support::doc_mock();
    auto base = support::doc_mock();
    rec->set_handler([&](const LlmRequest& r) {
        std::lock_guard lock(mu);
        prompts.push_back(r.joined_text());
        return std::optional<std::string>(base->complete(r).text);
    });
    LlmGateway second(rec, nullptr);
    const DocStore next = gen_docs_incremental(after, &store, second, options(), &stats);
    EXPECT_EQ(stats.reused, 19u);
    EXPECT_EQ(stats.regenerated, 1u);
    // Three units in the changed file plus one file-level doc.
    EXPECT_EQ(second.ledger().at(Stage::doc_gen).calls, 4);
    EXPECT_EQ(prompted_paths(prompts), (std::set<std::string>{"pkg/mod7.py"}));
    EXPECT_EQ(next.find("pkg/mod3.py")->unit_docs, store.find("pkg/mod3.py")->unit_docs);
    EXPECT_TRUE(next.find("pkg/mod7.py")->unit_docs.count("Extra7"));

    LlmGateway third(support::doc_mock(), nullptr);
    gen_docs_incremental(after, &next, third, options(), &stats);
    EXPECT_EQ(third.ledger().at(Stage::doc_gen).calls, 0);

    DocGenOptions forced = options();
    forced.force = true;
    LlmGateway fourth(support::doc_mock(), nullptr);
    gen_docs_incremental(after, &next, fourth, forced, &stats);
    EXPECT_EQ(stats.regenerated, 20u);
}

TEST(Incremental, FailedFilesAreFlaggedAndRetried) {
    const auto snap = snapshot_from_files(package(3));
    auto mock = support::doc_mock();
    auto base = support::doc_mock();
    bool fail = true;
    mock->set_handler([&](const LlmRequest& r) -> std::optional<std::string> {
        if (fail && r.joined_text().find("pkg/mod1.py") != std::string::npos)
            throw ProviderError("unavailable", false);
        return base->complete(r).text;
    });
    LlmGateway llm(mock, nullptr);
    DocGenStats stats;
    const auto store = gen_docs_incremental(snap, nullptr, llm, options(), &stats);
    EXPECT_EQ(stats.failed, 1u);
    EXPECT_EQ(store.flagged(), (std::vector<std::string>{"pkg/mod1.py"}));

    fail = false;
    const auto again = gen_docs_incremental(snap, &store, llm, options(), &stats);
    EXPECT_EQ(stats.reused, 2u);
    EXPECT_EQ(stats.regenerated, 1u);
    EXPECT_TRUE(again.flagged().empty());
}

TEST(Incremental, UnitlessFilesAreOptional) {
    const auto snap = snapshot_from_files({SourceFile::from_content("consts.py", "A = 1\nB = 2\n")});
    LlmGateway llm(support::doc_mock(), nullptr);
    auto o = options();
    auto store = gen_docs_incremental(snap, nullptr, llm, o);
    EXPECT_EQ(store.find("consts.py")->file_doc.architectural_role, "Module consts.py of the package.");
    o.document_unitless_files = false;
    LlmGateway llm2(support::doc_mock(), nullptr);
    store = gen_docs_incremental(snap, nullptr, llm2, o);
    EXPECT_TRUE(store.find("consts.py")->file_doc.architectural_role.empty());
    EXPECT_EQ(llm2.ledger().at(Stage::doc_gen).calls, 0);
}

TEST(DocStoreFiles, SaveLoadRoundTrip) {
    LlmGateway llm(support::doc_mock(), nullptr);
    auto store = gen_docs_incremental(snapshot_from_files(package(4)), nullptr, llm, options());
    store.entries["pkg/mod2.py"].error = "boom";
    support::TempDir dir;
    store.save(dir / "docs");
    EXPECT_EQ(DocStore::load(dir / "docs"), store);
    EXPECT_TRUE(std::filesystem::exists(dir / "docs/files/pkg/mod0.py.json"));
    EXPECT_NE(render_file_doc(store.find("pkg/mod0.py")->file_doc).find("load0: Does the work of load0."),
              std::string::npos);
}

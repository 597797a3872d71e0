#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "docrepair/code_model.hpp"
#include "docrepair/llm.hpp"
#include "docrepair/prompts.hpp"

namespace docrepair {

struct FunctionDoc {
    std::string unit_name;
    std::string parameters;
    std::string description;
    std::string usage_notes;
    std::string output_examples;
    bool fallback = false;  // response lacked section markers

    bool operator==(const FunctionDoc&) const = default;
};

struct FileDoc {
    /// One summary per top-level unit, in source order.
    std::vector<std::pair<std::string, std::string>> summaries;
    std::string architectural_role;

    bool operator==(const FileDoc&) const = default;
};

struct DocEntry {
    std::string path;
    std::string content_hash;
    FileDoc file_doc;
    std::map<std::string, FunctionDoc> unit_docs;
    std::string provenance;  // snapshot or issue id that produced the entry
    std::optional<std::string> error;  // set when generation failed for this file

    bool operator==(const DocEntry&) const = default;
};

class MissingUnitDocs : public Error {
public:
    using Error::Error;
};

/// Path-keyed documentation cache.
class DocStore {
public:
    std::map<std::string, DocEntry> entries;

    const DocEntry* find(const std::string& path) const;
    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
    std::vector<std::string> flagged() const;

    /// Writes manifest.json plus files/<path>.json under `dir`, replacing
    /// any previous store there.
    void save(const std::filesystem::path& dir) const;
    static DocStore load(const std::filesystem::path& dir);

    bool operator==(const DocStore&) const = default;
};

struct DocGenOptions {
    std::string model_id;
    std::optional<std::int64_t> seed;
    bool force = false;                   // regenerate even when hashes match
    bool document_unitless_files = true;  // file docs for files without units
    std::string provenance;
    const PromptSet* prompts = nullptr;
};

struct DocGenStats {
    std::size_t reused = 0;
    std::size_t regenerated = 0;
    std::size_t failed = 0;
};

/// Splits a marker-delimited response. Returns nullopt when the
/// DESCRIPTION section is missing or empty.
std::optional<FunctionDoc> parse_function_doc(const std::string& unit_name, std::string_view text);

struct UnitMetadata {
    std::string path;
    std::string signature;
    std::string context;
    std::vector<std::string> dependencies;
};

FunctionDoc gen_function_doc(const CodeUnit& unit, std::string_view source, const UnitMetadata& meta,
                             LlmGateway& llm, const DocGenOptions& options);

/// `units` are the file's top-level unit names in source order.
FileDoc gen_file_doc(const std::string& path, const std::vector<std::string>& units,
                     const std::map<std::string, FunctionDoc>& unit_docs, const StructureTree& tree,
                     std::string_view preamble, LlmGateway& llm, const DocGenOptions& options);

/// Reuses entries of `prev` whose (path, content hash) match; documents the
/// rest. Per-file failures are recorded on the entry.
DocStore gen_docs_incremental(const RepoSnapshot& snapshot, const DocStore* prev, LlmGateway& llm,
                              const DocGenOptions& options, DocGenStats* stats = nullptr);

std::string render_function_doc(const FunctionDoc& doc);
/// Architectural role, then unit summaries in unit order. Embedded by retrieval.
std::string render_file_doc(const FileDoc& doc);

/// Top-level unit names of a file in source order, without duplicates.
std::vector<std::string> unit_names(const RepoSnapshot& snapshot, const std::string& path);

}  // namespace docrepair

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "docrepair/common.hpp"

namespace docrepair {

enum class Language { python, javascript, typescript, other };

std::string to_string(Language lang);
Language language_from_string(std::string_view name);
Language language_for_path(std::string_view path);

struct SourceFile {
    std::string path;  // repo-relative, '/' separated
    Language language = Language::other;
    std::string content;
    std::string content_hash;

    static SourceFile from_content(std::string path, std::string content);
};

enum class UnitKind { function, class_, method };

std::string to_string(UnitKind kind);

/// 1-based inclusive line range.
struct Span {
    int start_line = 0;
    int end_line = 0;

    bool contains(const Span& other) const {
        return start_line <= other.start_line && other.end_line <= end_line;
    }
    bool overlaps(const Span& other) const {
        return start_line <= other.end_line && other.start_line <= end_line;
    }
    int line_count() const { return end_line - start_line + 1; }
    auto operator<=>(const Span&) const = default;
};

struct CodeUnit {
    std::string name;
    UnitKind kind = UnitKind::function;
    std::string signature;
    Span span;
    std::optional<std::string> parent;
    bool anonymous = false;
    /// One-hop, same-file, top-level unit names mentioned in call or
    /// attribute position inside this unit. Never contains `name`.
    std::set<std::string> references;

    bool top_level() const { return !parent.has_value(); }
};

enum class PreambleKind { import, global };

struct PreambleItem {
    PreambleKind kind = PreambleKind::import;
    Span span;
};

struct ParsedFile {
    std::vector<CodeUnit> units;  // ordered by start line; methods follow their class
    std::vector<PreambleItem> preamble;
};

class UnsupportedLanguage : public Error {
public:
    using Error::Error;
};

class ParseFailure : public Error {
public:
    using Error::Error;
};

/// Throws UnsupportedLanguage for Language::other and ParseFailure on
/// malformed input (unterminated literal, unbalanced brackets).
ParsedFile parse_file(const SourceFile& file);

/// One-hop references of `target` restricted to top-level names in `units`.
std::set<std::string> static_references(std::span<const CodeUnit> units, const CodeUnit& target);

enum class SegmentKind { unit, preamble, residual };

struct Segment {
    SegmentKind kind = SegmentKind::residual;
    Span span;
    std::string unit_name;  // set for SegmentKind::unit
};

/// Partitions lines 1..line_count into top-level unit, preamble and
/// residual segments in file order.
std::vector<Segment> segment_file(const ParsedFile& parsed, int line_count);

int count_lines(std::string_view text);

/// Source text of lines [span.start_line, span.end_line], terminators included.
std::string slice_lines(std::string_view text, const Span& span);

struct TreeNode {
    std::string name;
    bool is_dir = false;
    std::vector<TreeNode> children;  // sorted by name
};

class StructureTree {
public:
    StructureTree();
    void add_file(std::string_view path);
    const TreeNode& root() const { return root_; }
    std::vector<std::string> leaves() const;
    /// Indented rendering; the leaf equal to `highlight` is marked.
    std::string render(std::string_view highlight = {}) const;

private:
    TreeNode root_;
};

struct SnapshotIssue {
    std::string path;
    std::string reason;
};

struct RepoSnapshot {
    std::map<std::string, SourceFile> files;
    std::map<std::string, std::vector<CodeUnit>> units;
    std::map<std::string, std::vector<PreambleItem>> preamble;
    StructureTree tree;
    std::vector<SnapshotIssue> parse_failures;
    std::vector<SnapshotIssue> skipped;

    const SourceFile& file(const std::string& path) const;
    std::vector<const CodeUnit*> top_level_units(const std::string& path) const;
    const CodeUnit* find_unit(const std::string& path, std::string_view name) const;
};

struct SnapshotOptions {
    std::set<Language> languages{Language::python, Language::javascript, Language::typescript};
    bool include_assets_in_tree = false;
};

/// Parses every supported file below `root` (files are parsed in parallel).
RepoSnapshot build_snapshot(const std::filesystem::path& root, const SnapshotOptions& options = {});

/// Same as build_snapshot but over in-memory files; used by tests and tools.
RepoSnapshot snapshot_from_files(std::vector<SourceFile> files);

/// Key/value manifest with stable field order.
std::string serialize_manifest(const RepoSnapshot& snapshot);

struct ManifestEntry {
    std::string path;
    Language language = Language::other;
    std::string content_hash;
};

std::vector<ManifestEntry> parse_manifest(std::string_view text);

}  // namespace docrepair

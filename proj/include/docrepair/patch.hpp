#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docrepair/common.hpp"

namespace docrepair {

struct EditPair {
    std::string search;
    std::string replace;

    bool operator==(const EditPair&) const = default;
};

struct FilePatch {
    std::string path;
    std::vector<EditPair> edits;
    std::optional<std::string> resulting_text;

    bool operator==(const FilePatch&) const = default;
};

using EditMap = std::map<std::string, std::vector<EditPair>>;

struct ParsedEdits {
    EditMap edits;
    std::vector<std::string> diagnostics;  // one per skipped block
};

class NoEditsFound : public Error {
public:
    NoEditsFound(const std::string& what, std::vector<std::string> diagnostics)
        : Error(what), diagnostics_(std::move(diagnostics)) {}
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

class ApplyError : public Error {
public:
    ApplyError(const std::string& what, std::size_t edit_index) : Error(what), edit_index_(edit_index) {}
    std::size_t edit_index() const { return edit_index_; }

private:
    std::size_t edit_index_;
};

class SearchNotFound : public ApplyError {
public:
    explicit SearchNotFound(std::size_t edit_index);
};

class AmbiguousMatch : public ApplyError {
public:
    AmbiguousMatch(std::size_t edit_index, std::size_t occurrences);
    std::size_t occurrences() const { return occurrences_; }

private:
    std::size_t occurrences_;
};

inline constexpr std::string_view kSearchMarker = "<<<<<<< SEARCH";
inline constexpr std::string_view kDividerMarker = "=======";
inline constexpr std::string_view kReplaceMarker = ">>>>>>> REPLACE";

/// Extracts path-tagged SEARCH/REPLACE blocks; surrounding prose and code
/// fences are ignored. Throws NoEditsFound when nothing well-formed remains.
ParsedEdits parse_edits(std::string_view llm_output);

/// Canonical wire rendering, paths in sorted order.
std::string render_edits(const EditMap& edits);

/// Applies edits in order. Each search block must occur exactly once; if it
/// does not occur at all, a match ignoring trailing whitespace is tried.
std::string apply_edits(std::string_view original, const std::vector<EditPair>& edits);

/// Overlapping occurrences of needle in haystack.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

/// Line diff in unified format with `context` lines around each change.
std::string unified_diff(const std::string& path, std::string_view before, std::string_view after, int context = 3);

}  // namespace docrepair

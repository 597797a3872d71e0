#pragma once

#include <set>
#include <string>
#include <vector>

#include "docrepair/code_model.hpp"

namespace docrepair {

class UnknownUnit : public Error {
public:
    using Error::Error;
};

struct ElidedSpan {
    Span span;                  // lines of the original file
    int placeholder_line = 0;   // 1-based line in the pruned text
    std::string placeholder;    // the placeholder line, without newline
    std::string original_text;  // elided lines, byte-exact
};

struct PrunedFile {
    std::string path;
    std::string text;
    std::set<std::string> kept_units;
    std::vector<ElidedSpan> elided_spans;
    /// line_map[i] is the original line of pruned line i + 1, or 0 for a placeholder.
    std::vector<int> line_map;
};

/// Keeps the localized units, every unit they reference directly, imports,
/// globals and code outside units. Other top-level units shrink to a
/// one-line placeholder. A localized method name selects its class.
PrunedFile prune_file(const RepoSnapshot& snapshot, const std::string& path,
                      const std::vector<std::string>& localized, bool enabled = true);

/// Reinserts the elided spans.
std::string restore(const PrunedFile& pruned);

/// "# … def f(x): elided …" in the language's comment syntax.
std::string placeholder_for(Language language, std::string_view signature);

}  // namespace docrepair

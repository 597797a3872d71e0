#include "docrepair/patch.hpp"

#include <algorithm>
#include <filesystem>

namespace docrepair {

SearchNotFound::SearchNotFound(std::size_t edit_index)
    : ApplyError("edit " + std::to_string(edit_index) + ": search block not found", edit_index) {}

AmbiguousMatch::AmbiguousMatch(std::size_t edit_index, std::size_t occurrences)
    : ApplyError("edit " + std::to_string(edit_index) + ": search block occurs " + std::to_string(occurrences) +
                     " times",
                 edit_index),
      occurrences_(occurrences) {}

namespace {

bool is_marker(std::string_view line, std::string_view marker) { return rtrim(line) == marker; }

bool is_fence(std::string_view line) { return trim(line).starts_with("```"); }

std::optional<std::string> normalize_path(std::string_view raw) {
    auto s = trim(raw);
    while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '`')) s = trim(s.substr(1));
    while (!s.empty() && (s.back() == '`' || s.back() == '*' || s.back() == ':')) s = trim(s.substr(0, s.size() - 1));
    if (s.starts_with("./")) s.remove_prefix(2);
    while (s.starts_with("/")) s.remove_prefix(1);
    if (s.empty() || s.find_first_of(" \t") != std::string_view::npos) return std::nullopt;
    const auto norm = std::filesystem::path(std::string(s)).lexically_normal().generic_string();
    if (norm.empty() || norm == "." || norm.starts_with("..")) return std::nullopt;
    return norm;
}

}  // namespace

ParsedEdits parse_edits(std::string_view llm_output) {
    ParsedEdits out;
    const auto lines = split_lines_keep(llm_output);
    std::string_view last_text;  // last non-empty line outside a block
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (!is_marker(line, kSearchMarker)) {
            if (is_marker(line, kDividerMarker) || is_marker(line, kReplaceMarker)) {
                out.diagnostics.push_back("line " + std::to_string(i + 1) + ": marker outside a block");
                last_text = {};
            } else if (!trim(line).empty() && !is_fence(line)) {
                last_text = line;
            }
            continue;
        }
        ++blocks;
        const std::size_t start = i + 1;
        std::string search, replace;
        bool divided = false, closed = false, broken = false;
        std::size_t j = i + 1;
        for (; j < lines.size(); ++j) {
            const auto l = lines[j];
            if (is_marker(l, kSearchMarker)) {
                broken = true;
                break;
            }
            if (is_marker(l, kDividerMarker) && !divided) {
                divided = true;
                continue;
            }
            if (is_marker(l, kReplaceMarker)) {
                closed = divided;
                if (!divided) broken = true;
                break;
            }
            std::string text(l);
            if (!text.ends_with('\n')) text += '\n';
            (divided ? replace : search) += text;
        }
        const auto path = normalize_path(last_text);
        last_text = {};
        auto skip = [&](const std::string& why) {
            out.diagnostics.push_back("block at line " + std::to_string(start) + ": " + why);
        };
        if (broken || !closed) {
            skip(!divided ? "missing divider" : "missing closing marker");
            // A nested SEARCH marker starts the next block.
            i = (j < lines.size() && is_marker(lines[j], kSearchMarker)) ? j - 1 : j;
            continue;
        }
        i = j;
        if (!path) skip("no file path before the block");
        else if (search.empty()) skip("empty search");
        else if (search == replace) skip("search equals replace");
        else out.edits[*path].push_back({std::move(search), std::move(replace)});
    }
    if (out.edits.empty())
        throw NoEditsFound(blocks == 0 ? "no edit blocks in output"
                                       : "no well-formed edit blocks among " + std::to_string(blocks),
                           out.diagnostics);
    return out;
}

std::string render_edits(const EditMap& edits) {
    std::string out;
    auto with_nl = [](const std::string& s) { return s.empty() || s.ends_with('\n') ? s : s + "\n"; };
    for (const auto& [path, list] : edits)
        for (const auto& e : list) {
            out += path + "\n";
            out += std::string(kSearchMarker) + "\n" + with_nl(e.search);
            out += std::string(kDividerMarker) + "\n" + with_nl(e.replace);
            out += std::string(kReplaceMarker) + "\n";
        }
    return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

namespace {

/// Line-aligned match ignoring trailing whitespace. Returns the byte range
/// of the single match, or throws.
std::pair<std::size_t, std::size_t> fuzzy_find(std::string_view text, std::string_view search, std::size_t idx) {
    const auto tl = split_lines_keep(text);
    auto sl = split_lines_keep(search);
    while (!sl.empty() && rtrim(sl.back()).empty() && sl.size() > 1) sl.pop_back();
    if (sl.empty() || tl.size() < sl.size()) throw SearchNotFound(idx);
    std::vector<std::size_t> offsets(tl.size() + 1, 0);
    for (std::size_t i = 0; i < tl.size(); ++i) offsets[i + 1] = offsets[i] + tl[i].size();
    std::size_t count = 0, at = 0;
    for (std::size_t i = 0; i + sl.size() <= tl.size(); ++i) {
        bool eq = true;
        for (std::size_t k = 0; k < sl.size() && eq; ++k) eq = rtrim(tl[i + k]) == rtrim(sl[k]);
        if (eq) {
            if (count == 0) at = i;
            ++count;
        }
    }
    if (count == 0) throw SearchNotFound(idx);
    if (count > 1) throw AmbiguousMatch(idx, count);
    return {offsets[at], offsets[at + sl.size()]};
}

}  // namespace

std::string apply_edits(std::string_view original, const std::vector<EditPair>& edits) {
    // Search blocks are whole lines; give a final unterminated line its newline while matching.
    const bool added_nl = !original.empty() && !original.ends_with('\n');
    std::string text(original);
    if (added_nl) text += '\n';
    for (std::size_t i = 0; i < edits.size(); ++i) {
        const auto& e = edits[i];
        if (e.search.empty()) throw SearchNotFound(i);
        const std::size_t n = count_occurrences(text, e.search);
        if (n > 1) throw AmbiguousMatch(i, n);
        if (n == 1) {
            text.replace(text.find(e.search), e.search.size(), e.replace);
            continue;
        }
        auto [begin, end] = fuzzy_find(text, e.search, i);
        std::string repl = e.replace;
        if (end > begin && text[end - 1] == '\n' && !repl.empty() && !repl.ends_with('\n')) repl += '\n';
        text.replace(begin, end - begin, repl);
    }
    if (added_nl && text.ends_with('\n')) text.pop_back();
    return text;
}

std::string unified_diff(const std::string& path, std::string_view before, std::string_view after, int context) {
    const auto a = split_lines_keep(before);
    const auto b = split_lines_keep(after);
    if (a == b) return {};

    std::size_t pre = 0;
    while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
    std::size_t suf = 0;
    while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;

    struct Op {
        char kind;  // ' ', '-', '+'
        std::size_t ai, bi;
    };
    std::vector<Op> ops;
    for (std::size_t i = 0; i < pre; ++i) ops.push_back({' ', i, i});

    const std::size_t n = a.size() - pre - suf, m = b.size() - pre - suf;
    if (n * m <= 16'000'000) {
        std::vector<std::uint32_t> dp((n + 1) * (m + 1), 0);
        auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (m + 1) + j]; };
        for (std::size_t i = n; i-- > 0;)
            for (std::size_t j = m; j-- > 0;)
                at(i, j) = a[pre + i] == b[pre + j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
        std::size_t i = 0, j = 0;
        while (i < n || j < m) {
            if (i < n && j < m && a[pre + i] == b[pre + j]) {
                ops.push_back({' ', pre + i++, pre + j++});
            } else if (j < m && (i == n || at(i, j + 1) > at(i + 1, j))) {
                ops.push_back({'+', pre + i, pre + j++});
            } else {
                ops.push_back({'-', pre + i++, pre + j});
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) ops.push_back({'-', pre + i, pre});
        for (std::size_t j = 0; j < m; ++j) ops.push_back({'+', pre + n, pre + j});
    }
    for (std::size_t k = 0; k < suf; ++k) ops.push_back({' ', a.size() - suf + k, b.size() - suf + k});

    std::string out = "--- a/" + path + "\n+++ b/" + path + "\n";
    const std::size_t ctx = static_cast<std::size_t>(std::max(context, 0));
    std::size_t k = 0;
    while (k < ops.size()) {
        while (k < ops.size() && ops[k].kind == ' ') ++k;
        if (k == ops.size()) break;
        const std::size_t first = k >= ctx ? k - ctx : 0;
        std::size_t last = k;  // last change in the hunk
        std::size_t scan = k + 1;
        while (scan < ops.size()) {
            if (ops[scan].kind != ' ') {
                last = scan;
                ++scan;
                continue;
            }
            std::size_t run = scan;
            while (run < ops.size() && ops[run].kind == ' ') ++run;
            if (run == ops.size() || run - scan > 2 * ctx) break;
            scan = run;
        }
        const std::size_t end = std::min(ops.size(), last + 1 + ctx);

        std::size_t a_len = 0, b_len = 0;
        for (std::size_t x = first; x < end; ++x) {
            if (ops[x].kind != '+') ++a_len;
            if (ops[x].kind != '-') ++b_len;
        }
        const std::size_t a_start = ops[first].ai + (a_len ? 1 : 0);
        const std::size_t b_start = ops[first].bi + (b_len ? 1 : 0);
        out += "@@ -" + std::to_string(a_start) + "," + std::to_string(a_len) + " +" + std::to_string(b_start) + "," +
               std::to_string(b_len) + " @@\n";
        for (std::size_t x = first; x < end; ++x) {
            const auto line = ops[x].kind == '+' ? b[ops[x].bi] : a[ops[x].ai];
            out += ops[x].kind;
            out += line;
            if (!line.ends_with('\n')) out += "\n\\ No newline at end of file\n";
        }
        k = end;
    }
    return out;
}

}  // namespace docrepair

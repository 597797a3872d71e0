#include "docrepair/code_model.hpp"

#include <algorithm>
#include <sstream>

#include "lexer.hpp"

namespace docrepair {

std::string to_string(Language lang) {
    switch (lang) {
        case Language::python: return "python";
        case Language::javascript: return "javascript";
        case Language::typescript: return "typescript";
        case Language::other: return "other";
    }
    return "other";
}

Language language_from_string(std::string_view name) {
    if (name == "python") return Language::python;
    if (name == "javascript") return Language::javascript;
    if (name == "typescript") return Language::typescript;
    if (name == "other") return Language::other;
    throw ConfigError("unknown language: " + std::string(name));
}

Language language_for_path(std::string_view path) {
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos || path.find('/', dot) != std::string_view::npos) return Language::other;
    std::string ext = to_lower(path.substr(dot + 1));
    if (ext == "py" || ext == "pyi") return Language::python;
    if (ext == "js" || ext == "jsx" || ext == "mjs" || ext == "cjs") return Language::javascript;
    if (ext == "ts" || ext == "tsx" || ext == "mts" || ext == "cts") return Language::typescript;
    return Language::other;
}

SourceFile SourceFile::from_content(std::string path, std::string content) {
    SourceFile f;
    f.language = language_for_path(path);
    f.path = std::move(path);
    f.content_hash = sha256_hex(content);
    f.content = std::move(content);
    return f;
}

std::string to_string(UnitKind kind) {
    switch (kind) {
        case UnitKind::function: return "function";
        case UnitKind::class_: return "class";
        case UnitKind::method: return "method";
    }
    return "function";
}

namespace {

bool ends_with_ci(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && to_lower(s.substr(s.size() - suffix.size())) == suffix;
}

}  // namespace

ParsedFile parse_file(const SourceFile& file) {
    switch (file.language) {
        case Language::python:
            return detail::parse_python(file.content);
        case Language::javascript:
            return detail::parse_javascript(file.content, false, true);
        case Language::typescript:
            return detail::parse_javascript(file.content, true, ends_with_ci(file.path, ".tsx"));
        case Language::other:
            break;
    }
    throw UnsupportedLanguage("unsupported language for " + file.path);
}

namespace detail {

void attach_references(std::vector<CodeUnit>& units, const std::vector<Token>& tokens) {
    std::set<std::string, std::less<>> top_names;
    for (const auto& u : units) {
        if (u.top_level() && !u.anonymous) top_names.insert(u.name);
    }
    if (top_names.empty()) return;
    for (std::size_t j = 0; j < tokens.size(); ++j) {
        const Token& t = tokens[j];
        if (t.kind != TokKind::ident || t.definition) continue;
        auto found = top_names.find(t.text);
        if (found == top_names.end()) continue;
        const Token* prev = j > 0 ? &tokens[j - 1] : nullptr;
        const Token* next = j + 1 < tokens.size() ? &tokens[j + 1] : nullptr;
        if (prev && (prev->is(".") || prev->is("?."))) continue;
        bool call_or_attr = next && (next->is("(") || next->is(".") || next->is("?."));
        bool applied = prev && (prev->is("@") || prev->is("new"));
        if (!(call_or_attr || applied || t.jsx_tag)) continue;
        for (auto& u : units) {
            if (u.span.start_line <= t.line && t.line <= u.span.end_line && u.name != *found) {
                u.references.insert(*found);
            }
        }
    }
}

}  // namespace detail

std::set<std::string> static_references(std::span<const CodeUnit> units, const CodeUnit& target) {
    std::set<std::string> names;
    for (const auto& u : units) {
        if (u.top_level() && !u.anonymous) names.insert(u.name);
    }
    std::set<std::string> out;
    for (const auto& r : target.references) {
        if (r != target.name && names.contains(r)) out.insert(r);
    }
    return out;
}

std::vector<Segment> segment_file(const ParsedFile& parsed, int line_count) {
    std::vector<Segment> covered;
    for (const auto& u : parsed.units) {
        if (u.top_level()) covered.push_back({SegmentKind::unit, u.span, u.name});
    }
    for (const auto& p : parsed.preamble) covered.push_back({SegmentKind::preamble, p.span, {}});
    std::sort(covered.begin(), covered.end(),
              [](const Segment& a, const Segment& b) { return a.span.start_line < b.span.start_line; });
    std::vector<Segment> out;
    int next = 1;
    for (auto& s : covered) {
        if (s.span.start_line < next) {
            throw std::logic_error("overlapping segments at line " + std::to_string(s.span.start_line));
        }
        if (s.span.start_line > next) out.push_back({SegmentKind::residual, Span{next, s.span.start_line - 1}, {}});
        next = s.span.end_line + 1;
        out.push_back(std::move(s));
    }
    if (next <= line_count) out.push_back({SegmentKind::residual, Span{next, line_count}, {}});
    return out;
}

int count_lines(std::string_view text) { return static_cast<int>(split_lines_keep(text).size()); }

std::string slice_lines(std::string_view text, const Span& span) {
    auto lines = split_lines_keep(text);
    std::string out;
    for (int l = span.start_line; l <= span.end_line && l <= static_cast<int>(lines.size()); ++l) {
        if (l >= 1) out.append(lines[static_cast<std::size_t>(l - 1)]);
    }
    return out;
}

StructureTree::StructureTree() {
    root_.name = ".";
    root_.is_dir = true;
}

void StructureTree::add_file(std::string_view path) {
    TreeNode* node = &root_;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto slash = path.find('/', start);
        bool leaf = slash == std::string_view::npos;
        std::string part(path.substr(start, leaf ? std::string_view::npos : slash - start));
        auto it = std::lower_bound(node->children.begin(), node->children.end(), part,
                                   [](const TreeNode& n, const std::string& key) { return n.name < key; });
        if (it == node->children.end() || it->name != part || it->is_dir == leaf) {
            TreeNode child;
            child.name = part;
            child.is_dir = !leaf;
            it = node->children.insert(it, std::move(child));
        }
        if (leaf) return;
        node = &*it;
        start = slash + 1;
    }
}

namespace {

void collect_leaves(const TreeNode& node, const std::string& prefix, std::vector<std::string>& out) {
    for (const auto& c : node.children) {
        std::string path = prefix.empty() ? c.name : prefix + "/" + c.name;
        if (c.is_dir) collect_leaves(c, path, out);
        else out.push_back(path);
    }
}

void render_node(const TreeNode& node, const std::string& prefix, int depth, std::string_view highlight,
                 std::string& out) {
    for (const auto& c : node.children) {
        std::string path = prefix.empty() ? c.name : prefix + "/" + c.name;
        out.append(static_cast<std::size_t>(depth) * 2 + 2, ' ');
        out += c.name;
        if (c.is_dir) {
            out += "/\n";
            render_node(c, path, depth + 1, highlight, out);
        } else {
            if (!highlight.empty() && path == highlight) out += "    <== current file";
            out += '\n';
        }
    }
}

}  // namespace

std::vector<std::string> StructureTree::leaves() const {
    std::vector<std::string> out;
    collect_leaves(root_, "", out);
    return out;
}

std::string StructureTree::render(std::string_view highlight) const {
    std::string out = "./\n";
    render_node(root_, "", 0, highlight, out);
    return out;
}

const SourceFile& RepoSnapshot::file(const std::string& path) const {
    auto it = files.find(path);
    if (it == files.end()) throw Error("file not in snapshot: " + path);
    return it->second;
}

std::vector<const CodeUnit*> RepoSnapshot::top_level_units(const std::string& path) const {
    std::vector<const CodeUnit*> out;
    auto it = units.find(path);
    if (it == units.end()) return out;
    for (const auto& u : it->second) {
        if (u.top_level()) out.push_back(&u);
    }
    return out;
}

const CodeUnit* RepoSnapshot::find_unit(const std::string& path, std::string_view name) const {
    auto it = units.find(path);
    if (it == units.end()) return nullptr;
    for (const auto& u : it->second) {
        if (u.top_level() && u.name == name) return &u;
    }
    return nullptr;
}

namespace {

struct ParseSlot {
    ParsedFile parsed;
    std::string failure;
};

RepoSnapshot assemble(std::vector<SourceFile> files, std::vector<std::string> extra_leaves,
                      std::vector<SnapshotIssue> skipped) {
    std::sort(files.begin(), files.end(), [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    std::vector<ParseSlot> slots(files.size());
    const long n = static_cast<long>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        auto& slot = slots[static_cast<std::size_t>(i)];
        try {
            slot.parsed = parse_file(files[static_cast<std::size_t>(i)]);
        } catch (const std::exception& e) {
            slot.failure = e.what();
        }
    }
    RepoSnapshot snap;
    snap.skipped = std::move(skipped);
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto& f = files[i];
        if (!slots[i].failure.empty()) snap.parse_failures.push_back({f.path, slots[i].failure});
        snap.tree.add_file(f.path);
        snap.units[f.path] = std::move(slots[i].parsed.units);
        snap.preamble[f.path] = std::move(slots[i].parsed.preamble);
        std::string path = f.path;
        snap.files.emplace(std::move(path), std::move(f));
    }
    for (const auto& leaf : extra_leaves) snap.tree.add_file(leaf);
    return snap;
}

bool excluded_dir(const std::string& name) {
    return name == ".git" || name == "node_modules" || name == "__pycache__" || name == ".hg" || name == ".svn";
}

}  // namespace

RepoSnapshot build_snapshot(const std::filesystem::path& root, const SnapshotOptions& options) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("repository root is not a readable directory: " + root.string());
    std::vector<SourceFile> files;
    std::vector<std::string> assets;
    std::vector<SnapshotIssue> skipped;
    fs::recursive_directory_iterator it(root, fs::directory_options::none, ec);
    if (ec) throw IoError("cannot read " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw IoError("cannot read below " + root.string() + ": " + ec.message());
        const auto& entry = *it;
        if (entry.is_directory() && excluded_dir(entry.path().filename().string())) {
            it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file() || entry.is_symlink()) continue;
        std::string rel = fs::relative(entry.path(), root).generic_string();
        if (rel.find('\n') != std::string::npos) {
            skipped.push_back({rel, "path contains a newline"});
            continue;
        }
        Language lang = language_for_path(rel);
        if (lang == Language::other || !options.languages.contains(lang)) {
            if (options.include_assets_in_tree) assets.push_back(rel);
            continue;
        }
        std::string content = read_file(entry.path());
        if (content.find('\0') != std::string::npos) {
            skipped.push_back({rel, "binary content"});
            if (options.include_assets_in_tree) assets.push_back(rel);
            continue;
        }
        files.push_back(SourceFile::from_content(rel, std::move(content)));
    }
    std::sort(assets.begin(), assets.end());
    std::sort(skipped.begin(), skipped.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return assemble(std::move(files), std::move(assets), std::move(skipped));
}

RepoSnapshot snapshot_from_files(std::vector<SourceFile> files) {
    std::vector<SnapshotIssue> skipped;
    std::vector<SourceFile> kept;
    for (auto& f : files) {
        if (f.language == Language::other) skipped.push_back({f.path, "unsupported language"});
        else kept.push_back(std::move(f));
    }
    return assemble(std::move(kept), {}, std::move(skipped));
}

std::string serialize_manifest(const RepoSnapshot& snapshot) {
    std::ostringstream out;
    out << "# docrepair snapshot manifest v1\n";
    std::set<std::string> failed;
    for (const auto& f : snapshot.parse_failures) failed.insert(f.path);
    for (const auto& [path, file] : snapshot.files) {
        const auto& units = snapshot.units.at(path);
        out << "\n[file]\n"
            << "path=" << path << '\n'
            << "language=" << to_string(file.language) << '\n'
            << "content_hash=" << file.content_hash << '\n'
            << "parse_status=" << (failed.contains(path) ? "failed" : "ok") << '\n'
            << "units=" << units.size() << '\n';
        for (const auto& u : units) {
            out << "\n[unit]\n"
                << "file=" << path << '\n'
                << "name=" << u.name << '\n'
                << "kind=" << to_string(u.kind) << '\n'
                << "parent=" << u.parent.value_or("") << '\n'
                << "start=" << u.span.start_line << '\n'
                << "end=" << u.span.end_line << '\n';
            out << "references=";
            bool first = true;
            for (const auto& r : u.references) {
                out << (first ? "" : ",") << r;
                first = false;
            }
            out << '\n';
        }
    }
    return out.str();
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
    std::vector<ManifestEntry> out;
    bool in_file = false;
    for (auto raw : split_lines_keep(text)) {
        std::string_view line = rtrim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            in_file = line == "[file]";
            if (in_file) out.emplace_back();
            continue;
        }
        if (!in_file) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error("malformed manifest line: " + std::string(line));
        std::string_view key = line.substr(0, eq);
        std::string value(line.substr(eq + 1));
        if (key == "path") out.back().path = value;
        else if (key == "language") out.back().language = language_from_string(value);
        else if (key == "content_hash") out.back().content_hash = value;
    }
    return out;
}

}  // namespace docrepair

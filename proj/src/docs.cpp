#include "docrepair/docs.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace docrepair {

namespace {

using nlohmann::json;

constexpr const char* kNone = "none";

enum class Section { none, parameters, description, usage_notes, output_examples };

Section section_header(std::string_view line) {
    line = trim(line);
    if (!line.starts_with("##")) return Section::none;
    while (!line.empty() && line.front() == '#') line.remove_prefix(1);
    const std::string name = to_lower(trim(line));
    if (name == "parameters") return Section::parameters;
    if (name == "description") return Section::description;
    if (name == "usage notes") return Section::usage_notes;
    if (name == "output examples") return Section::output_examples;
    return Section::none;
}

std::string or_none(std::string_view s) {
    s = trim(s);
    return s.empty() ? kNone : std::string(s);
}

const PromptSet& prompts_of(const DocGenOptions& options) {
    static const PromptSet defaults;
    return options.prompts ? *options.prompts : defaults;
}

LlmRequest doc_request(const DocGenOptions& options, std::string prompt) {
    LlmRequest req;
    req.stage = Stage::doc_gen;
    req.model_id = options.model_id;
    req.temperature = Temperature(0);
    req.seed = options.seed;
    req.messages.push_back(Message{"user", std::move(prompt), {}});
    return req;
}

struct ParsedFileDoc {
    std::map<std::string, std::string> summaries;
    std::optional<std::string> role;
};

ParsedFileDoc parse_file_doc(std::string_view text) {
    ParsedFileDoc out;
    std::string* current = nullptr;
    std::string role;
    bool have_role = false;
    std::map<std::string, std::string> summaries;
    for (auto line : split_lines_keep(text)) {
        auto t = trim(line);
        if (t.starts_with("##")) {
            auto head = t;
            while (!head.empty() && head.front() == '#') head.remove_prefix(1);
            head = trim(head);
            if (starts_with_ci(head, "summary ")) {
                current = &summaries[std::string(trim(head.substr(8)))];
                continue;
            }
            if (to_lower(head) == "architectural role") {
                current = &role;
                have_role = true;
                continue;
            }
        }
        if (current) *current += line;
    }
    for (auto& [name, body] : summaries) {
        auto s = trim(body);
        if (!s.empty()) out.summaries[name] = std::string(s);
    }
    if (have_role && !trim(role).empty()) out.role = std::string(trim(role));
    return out;
}

std::string preamble_text(const RepoSnapshot& snapshot, const std::string& path) {
    const auto& content = snapshot.file(path).content;
    std::string out;
    auto it = snapshot.preamble.find(path);
    if (it != snapshot.preamble.end())
        for (const auto& item : it->second) out += slice_lines(content, item.span);
    if (out.empty() && snapshot.top_level_units(path).empty()) {
        // Nothing structured to show; fall back to the head of the file.
        Span head{1, std::min(count_lines(content), 60)};
        if (head.end_line >= 1) out = slice_lines(content, head);
    }
    return out;
}

std::string unit_source(const RepoSnapshot& snapshot, const std::string& path, const std::string& name) {
    const auto& content = snapshot.file(path).content;
    std::string out;
    for (const auto* u : snapshot.top_level_units(path))
        if (u->name == name) out += slice_lines(content, u->span);
    return out;
}

json function_doc_json(const FunctionDoc& d) {
    return {{"unit_name", d.unit_name},
            {"parameters", d.parameters},
            {"description", d.description},
            {"usage_notes", d.usage_notes},
            {"output_examples", d.output_examples},
            {"fallback", d.fallback}};
}

FunctionDoc function_doc_from_json(const json& j) {
    FunctionDoc d;
    d.unit_name = j.at("unit_name").get<std::string>();
    d.parameters = j.at("parameters").get<std::string>();
    d.description = j.at("description").get<std::string>();
    d.usage_notes = j.at("usage_notes").get<std::string>();
    d.output_examples = j.at("output_examples").get<std::string>();
    d.fallback = j.value("fallback", false);
    return d;
}

json entry_json(const DocEntry& e) {
    json summaries = json::array();
    for (const auto& [name, text] : e.file_doc.summaries) summaries.push_back({{"unit", name}, {"summary", text}});
    json units = json::array();
    for (const auto& [_, d] : e.unit_docs) units.push_back(function_doc_json(d));
    json j = {{"path", e.path},
              {"content_hash", e.content_hash},
              {"provenance", e.provenance},
              {"file_doc", {{"architectural_role", e.file_doc.architectural_role}, {"summaries", summaries}}},
              {"unit_docs", units}};
    j["error"] = e.error ? json(*e.error) : json(nullptr);
    return j;
}

DocEntry entry_from_json(const json& j) {
    DocEntry e;
    e.path = j.at("path").get<std::string>();
    e.content_hash = j.at("content_hash").get<std::string>();
    e.provenance = j.value("provenance", "");
    const auto& fd = j.at("file_doc");
    e.file_doc.architectural_role = fd.at("architectural_role").get<std::string>();
    for (const auto& s : fd.at("summaries"))
        e.file_doc.summaries.emplace_back(s.at("unit").get<std::string>(), s.at("summary").get<std::string>());
    for (const auto& u : j.at("unit_docs")) {
        auto d = function_doc_from_json(u);
        e.unit_docs.emplace(d.unit_name, std::move(d));
    }
    if (j.contains("error") && !j["error"].is_null()) e.error = j["error"].get<std::string>();
    return e;
}

}  // namespace

const DocEntry* DocStore::find(const std::string& path) const {
    auto it = entries.find(path);
    return it == entries.end() ? nullptr : &it->second;
}

std::vector<std::string> DocStore::flagged() const {
    std::vector<std::string> out;
    for (const auto& [path, e] : entries)
        if (e.error) out.push_back(path);
    return out;
}

void DocStore::save(const std::filesystem::path& dir) const {
    std::filesystem::remove_all(dir / "files");
    json manifest = {{"format", "docrepair-docstore-1"}, {"files", json::array()}};
    for (const auto& [path, e] : entries) {
        manifest["files"].push_back({{"path", path}, {"content_hash", e.content_hash}, {"provenance", e.provenance}});
        write_file(dir / "files" / (path + ".json"), entry_json(e).dump(2) + "\n");
    }
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

DocStore DocStore::load(const std::filesystem::path& dir) {
    DocStore store;
    try {
        const auto manifest = json::parse(read_file(dir / "manifest.json"));
        for (const auto& f : manifest.at("files")) {
            const auto path = f.at("path").get<std::string>();
            auto e = entry_from_json(json::parse(read_file(dir / "files" / (path + ".json"))));
            if (e.path != path) throw IoError("doc store entry path mismatch for " + path);
            store.entries.emplace(path, std::move(e));
        }
    } catch (const json::exception& e) {
        throw IoError("doc store " + dir.string() + ": " + e.what());
    }
    return store;
}

std::optional<FunctionDoc> parse_function_doc(const std::string& unit_name, std::string_view text) {
    std::map<Section, std::string> bodies;
    Section current = Section::none;
    for (auto line : split_lines_keep(text)) {
        const Section s = section_header(line);
        if (s != Section::none) {
            current = s;
            bodies[s];
            continue;
        }
        if (current != Section::none) bodies[current] += line;
    }
    auto desc = bodies.find(Section::description);
    if (desc == bodies.end() || trim(desc->second).empty()) return std::nullopt;
    FunctionDoc d;
    d.unit_name = unit_name;
    d.parameters = or_none(bodies[Section::parameters]);
    d.description = std::string(trim(desc->second));
    d.usage_notes = or_none(bodies[Section::usage_notes]);
    d.output_examples = or_none(bodies[Section::output_examples]);
    return d;
}

FunctionDoc gen_function_doc(const CodeUnit& unit, std::string_view source, const UnitMetadata& meta,
                             LlmGateway& llm, const DocGenOptions& options) {
    std::string deps;
    for (const auto& d : meta.dependencies) deps += (deps.empty() ? "" : ", ") + d;
    const auto req = doc_request(
        options, prompts_of(options).render("function_doc", {{"path", meta.path},
                                                             {"unit_name", unit.name},
                                                             {"signature", meta.signature},
                                                             {"context", meta.context.empty() ? kNone : meta.context},
                                                             {"dependencies", deps.empty() ? kNone : deps},
                                                             {"source", std::string(source)}}));
    std::string last;
    for (int attempt = 0; attempt < 2; ++attempt) {
        last = llm.complete(req).text;
        if (auto doc = parse_function_doc(unit.name, last)) return *doc;
    }
    FunctionDoc d;
    d.unit_name = unit.name;
    d.parameters = kNone;
    d.description = trim(last).empty() ? "No description available." : std::string(trim(last));
    d.usage_notes = kNone;
    d.output_examples = kNone;
    d.fallback = true;
    return d;
}

FileDoc gen_file_doc(const std::string& path, const std::vector<std::string>& units,
                     const std::map<std::string, FunctionDoc>& unit_docs, const StructureTree& tree,
                     std::string_view preamble, LlmGateway& llm, const DocGenOptions& options) {
    std::string rendered;
    for (const auto& name : units) {
        auto it = unit_docs.find(name);
        if (it == unit_docs.end()) throw MissingUnitDocs(path + ": no documentation for unit " + name);
        rendered += "#### " + name + "\n" + render_function_doc(it->second) + "\n";
    }
    if (rendered.empty()) rendered = "(this file defines no functions or classes)\n";
    const auto req = doc_request(options, prompts_of(options).render("file_doc", {{"path", path},
                                                                                   {"tree", tree.render(path)},
                                                                                   {"preamble", std::string(preamble)},
                                                                                   {"unit_docs", rendered}}));
    ParsedFileDoc parsed;
    std::string last;
    for (int attempt = 0; attempt < 2; ++attempt) {
        last = llm.complete(req).text;
        parsed = parse_file_doc(last);
        if (parsed.role) break;
    }
    FileDoc doc;
    for (const auto& name : units) {
        auto it = parsed.summaries.find(name);
        doc.summaries.emplace_back(name, it != parsed.summaries.end() ? it->second : unit_docs.at(name).description);
    }
    if (parsed.role) doc.architectural_role = *parsed.role;
    else if (!trim(last).empty()) doc.architectural_role = std::string(trim(last));
    else doc.architectural_role = "Source file " + path + ".";
    return doc;
}

std::vector<std::string> unit_names(const RepoSnapshot& snapshot, const std::string& path) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto* u : snapshot.top_level_units(path))
        if (seen.insert(u->name).second) out.push_back(u->name);
    return out;
}

DocStore gen_docs_incremental(const RepoSnapshot& snapshot, const DocStore* prev, LlmGateway& llm,
                              const DocGenOptions& options, DocGenStats* stats) {
    DocStore store;
    std::vector<std::string> todo;
    DocGenStats local;
    for (const auto& [path, file] : snapshot.files) {
        const DocEntry* old = prev ? prev->find(path) : nullptr;
        if (!options.force && old && old->content_hash == file.content_hash && !old->error) {
            store.entries.emplace(path, *old);
            ++local.reused;
        } else {
            todo.push_back(path);
        }
    }

    std::vector<DocEntry> fresh(todo.size());
    const long n = static_cast<long>(todo.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const std::string& path = todo[static_cast<std::size_t>(i)];
        DocEntry& e = fresh[static_cast<std::size_t>(i)];
        e.path = path;
        e.content_hash = snapshot.file(path).content_hash;
        e.provenance = options.provenance;
        try {
            const auto names = unit_names(snapshot, path);
            for (const auto& name : names) {
                const CodeUnit* u = snapshot.find_unit(path, name);
                UnitMetadata meta;
                meta.path = path;
                meta.signature = u->signature;
                meta.context = to_string(u->kind) + " in " + path;
                meta.dependencies.assign(u->references.begin(), u->references.end());
                e.unit_docs.emplace(name, gen_function_doc(*u, unit_source(snapshot, path, name), meta, llm, options));
            }
            if (!names.empty() || options.document_unitless_files)
                e.file_doc = gen_file_doc(path, names, e.unit_docs, snapshot.tree, preamble_text(snapshot, path), llm,
                                          options);
        } catch (const Error& err) {
            e.error = err.what();
        }
    }
    for (auto& e : fresh) {
        if (e.error) ++local.failed;
        else ++local.regenerated;
        store.entries.emplace(e.path, std::move(e));
    }
    if (stats) *stats = local;
    return store;
}

std::string render_function_doc(const FunctionDoc& doc) {
    return "### PARAMETERS\n" + doc.parameters + "\n### DESCRIPTION\n" + doc.description + "\n### USAGE NOTES\n" +
           doc.usage_notes + "\n### OUTPUT EXAMPLES\n" + doc.output_examples + "\n";
}

std::string render_file_doc(const FileDoc& doc) {
    std::string out = doc.architectural_role;
    for (const auto& [name, summary] : doc.summaries) {
        if (!out.empty()) out += "\n";
        out += name + ": " + summary;
    }
    return out;
}

}  // namespace docrepair

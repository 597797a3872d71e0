#include "docrepair/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "docrepair/kernels.hpp"

namespace docrepair {

namespace {

constexpr const char* kIndexHeader = "docrepair-index 1";

bool better(const ScoredFile& a, const ScoredFile& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.path < b.path;
}

}  // namespace

std::vector<std::string> RetrievalResult::paths() const {
    std::vector<std::string> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(f.path);
    return out;
}

RetrievalIndex build_index(const DocStore& store, LlmGateway& llm) {
    if (store.empty()) throw EmptyStore("cannot build an index from an empty doc store");
    RetrievalIndex index;
    index.dim = llm.embedding_dim();
    index.provider = llm.embedding_model();
    std::vector<std::string> texts;
    for (const auto& [path, entry] : store.entries) {
        index.paths.push_back(path);
        texts.push_back(render_file_doc(entry.file_doc));
    }
    const auto vectors = llm.embed(Stage::retrieval, texts);
    index.matrix.reserve(index.paths.size() * index.dim);
    for (const auto& v : vectors) index.matrix.insert(index.matrix.end(), v.begin(), v.end());
    return index;
}

RetrievalResult retrieve_vectors(const RetrievalIndex& index, const std::vector<std::vector<double>>& queries,
                                 std::size_t k) {
    if (index.size() == 0) throw EmptyStore("retrieval index is empty");
    if (k == 0) throw ConfigError("k must be at least 1");
    std::map<std::string, double> best;
    std::vector<double> scores(index.size());
    std::vector<std::size_t> order(index.size());
    for (const auto& q : queries) {
        if (q.size() != index.dim) throw Error("query vector dimension does not match the index");
        kernels::dot_rows(q, index.matrix, scores);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t take = std::min(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (scores[a] != scores[b]) return scores[a] > scores[b];
                              return index.paths[a] < index.paths[b];
                          });
        for (std::size_t i = 0; i < take; ++i) {
            const auto& path = index.paths[order[i]];
            auto [it, inserted] = best.emplace(path, scores[order[i]]);
            if (!inserted) it->second = std::max(it->second, scores[order[i]]);
        }
    }
    RetrievalResult result;
    result.queries_used = queries.size();
    for (const auto& [path, score] : best) result.files.push_back({path, score});
    std::sort(result.files.begin(), result.files.end(), better);
    return result;
}

RetrievalResult retrieve(const RetrievalIndex& index, std::span<const Query> queries, LlmGateway& llm,
                         std::size_t k) {
    if (queries.empty()) return retrieve_vectors(index, {}, k);
    std::vector<std::string> texts;
    for (const auto& q : queries) texts.push_back(q.text);
    return retrieve_vectors(index, llm.embed(Stage::retrieval, texts), k);
}

void RetrievalIndex::save(const std::filesystem::path& file) const {
    std::string out;
    out += kIndexHeader;
    out += "\ndim " + std::to_string(dim) + "\nprovider " + nlohmann::json(provider).dump() + "\nentries " +
           std::to_string(paths.size()) + "\n";
    char buf[40];
    for (std::size_t i = 0; i < paths.size(); ++i) {
        out += nlohmann::json(paths[i]).dump();
        for (double x : row(i)) {
            std::snprintf(buf, sizeof buf, " %.17e", x);
            out += buf;
        }
        out += '\n';
    }
    write_file(file, out);
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& file) {
    const std::string text = read_file(file);
    std::istringstream in(text);
    auto fail = [&](const std::string& why) { return IoError("index " + file.string() + ": " + why); };
    std::string line;
    if (!std::getline(in, line) || line != kIndexHeader) throw fail("bad header");
    RetrievalIndex index;
    std::size_t count = 0;
    try {
        std::string key;
        if (!(in >> key >> index.dim) || key != "dim") throw fail("missing dim");
        in >> std::ws;
        if (!std::getline(in, line) || !line.starts_with("provider ")) throw fail("missing provider");
        index.provider = nlohmann::json::parse(line.substr(9)).get<std::string>();
        if (!(in >> key >> count) || key != "entries") throw fail("missing entry count");
        in >> std::ws;
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line)) throw fail("truncated");
            // The path is a JSON string; find its closing quote.
            std::size_t end = 1;
            while (end < line.size() && line[end] != '"') end += line[end] == '\\' ? 2 : 1;
            if (line.empty() || line[0] != '"' || end >= line.size()) throw fail("bad path on row " + std::to_string(i));
            index.paths.push_back(nlohmann::json::parse(line.substr(0, end + 1)).get<std::string>());
            const char* p = line.c_str() + end + 1;
            for (std::size_t j = 0; j < index.dim; ++j) {
                char* next = nullptr;
                const double v = std::strtod(p, &next);
                if (next == p) throw fail("short row " + std::to_string(i));
                index.matrix.push_back(v);
                p = next;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw fail(e.what());
    }
    return index;
}

}  // namespace docrepair

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "docrepair/docs.hpp"
#include "docrepair/llm.hpp"
#include "docrepair/media.hpp"

namespace docrepair {

class EmptyStore : public Error {
public:
    using Error::Error;
};

/// Flat exact-search index over file documentation. Row i of `matrix`
/// is the unit-norm embedding of `paths[i]`.
struct RetrievalIndex {
    std::size_t dim = 0;
    std::string provider;
    std::vector<std::string> paths;
    std::vector<double> matrix;

    std::size_t size() const { return paths.size(); }
    std::span<const double> row(std::size_t i) const { return {matrix.data() + i * dim, dim}; }

    /// Text format: header lines, then one row per entry with the
    /// JSON-quoted path followed by %.17e components.
    void save(const std::filesystem::path& file) const;
    static RetrievalIndex load(const std::filesystem::path& file);

    bool operator==(const RetrievalIndex&) const = default;
};

struct ScoredFile {
    std::string path;
    double score = 0.0;

    bool operator==(const ScoredFile&) const = default;
};

struct RetrievalResult {
    std::vector<ScoredFile> files;  // best score descending, then path
    std::size_t queries_used = 0;

    std::vector<std::string> paths() const;
};

/// One entry per documented file, embedded from render_file_doc.
RetrievalIndex build_index(const DocStore& store, LlmGateway& llm);

/// Top-k per query vector, merged by path keeping the best score.
RetrievalResult retrieve_vectors(const RetrievalIndex& index, const std::vector<std::vector<double>>& queries,
                                 std::size_t k = 50);

/// Embeds the query texts (billed to the retrieval stage) and calls retrieve_vectors.
RetrievalResult retrieve(const RetrievalIndex& index, std::span<const Query> queries, LlmGateway& llm,
                         std::size_t k = 50);

}  // namespace docrepair

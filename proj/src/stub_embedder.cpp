#include <cmath>

#include "docrepair/llm.hpp"

namespace docrepair {

StubEmbedder::StubEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<double> StubEmbedder::embed_one(std::string_view text) const {
    // \x02 and \x03 mark the boundaries so leading/trailing bytes get their own n-grams.
    std::string padded;
    padded.reserve(text.size() + 2);
    padded += '\x02';
    padded += text;
    padded += '\x03';

    const std::uint64_t basis = fnv1a64(std::to_string(seed_));
    std::vector<double> v(dim_, 0.0);
    for (std::size_t n = 1; n <= 3; ++n) {
        if (padded.size() < n) break;
        for (std::size_t i = 0; i + n <= padded.size(); ++i) {
            std::string_view gram(padded.data() + i, n);
            const std::uint64_t h = fnv1a64(gram, basis ^ (n * 0x9e3779b97f4a7c15ULL));
            const std::size_t slot = static_cast<std::size_t>(h % dim_);
            v[slot] += (h >> 63) ? -1.0 : 1.0;
        }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        // Every n-gram cancelled out; fall back to a fixed direction.
        v[static_cast<std::size_t>(basis % dim_)] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

EmbedResult StubEmbedder::embed(std::span<const std::string> texts) {
    EmbedResult out;
    out.vectors.resize(texts.size());
    const long n = static_cast<long>(texts.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out.vectors[static_cast<std::size_t>(i)] = embed_one(texts[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace docrepair

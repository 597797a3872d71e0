#include "docrepair/kernels.hpp"

#include <array>
#include <stdexcept>

namespace docrepair::kernels {

namespace {

// Below this many elements the threading overhead dominates.
constexpr std::size_t kParallelThreshold = 1 << 14;

struct Range {
    std::size_t begin;
    std::size_t end;
};

Range chunk(std::size_t n, std::size_t c) {
    return {n * c / kReductionChunks, n * (c + 1) / kReductionChunks};
}

void check_sizes(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("moments: size mismatch");
    if (a.empty()) throw std::invalid_argument("moments: empty input");
}

}  // namespace

Moments moments_serial(std::span<const double> a, std::span<const double> b) {
    check_sizes(a, b);
    const double n = static_cast<double>(a.size());
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
    }
    Moments m;
    m.mean_a = sa / n;
    m.mean_b = sb / n;
    double vaa = 0.0, vbb = 0.0, vab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - m.mean_a;
        const double db = b[i] - m.mean_b;
        vaa += da * da;
        vbb += db * db;
        vab += da * db;
    }
    m.var_a = vaa / n;
    m.var_b = vbb / n;
    m.cov = vab / n;
    return m;
}

Moments moments(std::span<const double> a, std::span<const double> b) {
    check_sizes(a, b);
    if (a.size() < kParallelThreshold) return moments_serial(a, b);
    const std::size_t n = a.size();
    std::array<double, kReductionChunks> pa{}, pb{};
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
        auto [lo, hi] = chunk(n, c);
        double sa = 0.0, sb = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            sa += a[i];
            sb += b[i];
        }
        pa[c] = sa;
        pb[c] = sb;
    }
    double sa = 0.0, sb = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
        sa += pa[c];
        sb += pb[c];
    }
    Moments m;
    m.mean_a = sa / static_cast<double>(n);
    m.mean_b = sb / static_cast<double>(n);

    std::array<double, kReductionChunks> paa{}, pbb{}, pab{};
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
        auto [lo, hi] = chunk(n, c);
        double vaa = 0.0, vbb = 0.0, vab = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double da = a[i] - m.mean_a;
            const double db = b[i] - m.mean_b;
            vaa += da * da;
            vbb += db * db;
            vab += da * db;
        }
        paa[c] = vaa;
        pbb[c] = vbb;
        pab[c] = vab;
    }
    double vaa = 0.0, vbb = 0.0, vab = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
        vaa += paa[c];
        vbb += pbb[c];
        vab += pab[c];
    }
    m.var_a = vaa / static_cast<double>(n);
    m.var_b = vbb / static_cast<double>(n);
    m.cov = vab / static_cast<double>(n);
    return m;
}

void dot_rows_serial(std::span<const double> query, std::span<const double> rows, std::span<double> out) {
    const std::size_t dim = query.size();
    if (dim == 0 || rows.size() != dim * out.size()) throw std::invalid_argument("dot_rows: shape mismatch");
    for (std::size_t r = 0; r < out.size(); ++r) {
        const double* row = rows.data() + r * dim;
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += query[j] * row[j];
        out[r] = s;
    }
}

void dot_rows(std::span<const double> query, std::span<const double> rows, std::span<double> out) {
    const std::size_t dim = query.size();
    if (dim == 0 || rows.size() != dim * out.size()) throw std::invalid_argument("dot_rows: shape mismatch");
    if (rows.size() < kParallelThreshold) {
        dot_rows_serial(query, rows, out);
        return;
    }
    const long n = static_cast<long>(out.size());
    // Each row is summed serially, so results match dot_rows_serial bit for bit.
#pragma omp parallel for schedule(static)
    for (long r = 0; r < n; ++r) {
        const double* row = rows.data() + static_cast<std::size_t>(r) * dim;
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += query[j] * row[j];
        out[static_cast<std::size_t>(r)] = s;
    }
}

}  // namespace docrepair::kernels

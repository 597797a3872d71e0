#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a `_serial` twin that
// tests use as the reference and the benchmark compares against.

#include <cstddef>
#include <span>

namespace docrepair::kernels {

/// First and second moments of two equally sized intensity arrays.
struct Moments {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double var_a = 0.0;  // population variance
    double var_b = 0.0;
    double cov = 0.0;
};

/// Two-pass moments. The parallel version reduces over a fixed number of
/// chunks and sums the partials in chunk order, so results do not depend
/// on the thread count.
Moments moments(std::span<const double> a, std::span<const double> b);
Moments moments_serial(std::span<const double> a, std::span<const double> b);

/// out[i] = dot(query, rows[i*dim .. (i+1)*dim)).
void dot_rows(std::span<const double> query, std::span<const double> rows, std::span<double> out);
void dot_rows_serial(std::span<const double> query, std::span<const double> rows, std::span<double> out);

/// Fixed chunk count used by the deterministic reductions.
inline constexpr std::size_t kReductionChunks = 64;

}  // namespace docrepair::kernels

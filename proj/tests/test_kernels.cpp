#include <gtest/gtest.h>
#include <omp.h>

#include <random>

#include "docrepair/kernels.hpp"

using namespace docrepair::kernels;

namespace {

std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

void expect_close(const Moments& a, const Moments& b, double tol) {
    EXPECT_NEAR(a.mean_a, b.mean_a, tol);
    EXPECT_NEAR(a.mean_b, b.mean_b, tol);
    EXPECT_NEAR(a.var_a, b.var_a, tol);
    EXPECT_NEAR(a.var_b, b.var_b, tol);
    EXPECT_NEAR(a.cov, b.cov, tol);
}

}  // namespace

TEST(Moments, ParallelMatchesSerial) {
    for (std::size_t n : {1u, 7u, 1000u, 16384u, 16385u, 250000u}) {
        const auto a = uniform(n, n), b = uniform(n, n + 1);
        expect_close(moments(a, b), moments_serial(a, b), 1e-12);
    }
}

TEST(Moments, IndependentOfThreadCount) {
    const auto a = uniform(100000, 1), b = uniform(100000, 2);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = moments(a, b);
    omp_set_num_threads(4);
    const auto four = moments(a, b);
    omp_set_num_threads(saved);
    EXPECT_EQ(one.mean_a, four.mean_a);
    EXPECT_EQ(one.var_b, four.var_b);
    EXPECT_EQ(one.cov, four.cov);
}

TEST(Moments, KnownValues) {
    const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8};
    const auto m = moments_serial(a, b);
    EXPECT_DOUBLE_EQ(m.mean_a, 2.5);
    EXPECT_DOUBLE_EQ(m.var_a, 1.25);
    EXPECT_DOUBLE_EQ(m.var_b, 5.0);
    EXPECT_DOUBLE_EQ(m.cov, 2.5);
}

TEST(DotRows, BitIdenticalToSerial) {
    const std::size_t dim = 96, rows = 513;
    const auto q = uniform(dim, 3), m = uniform(dim * rows, 4);
    std::vector<double> par(rows), ser(rows);
    dot_rows(q, m, par);
    dot_rows_serial(q, m, ser);
    EXPECT_EQ(par, ser);
    double expect0 = 0;
    for (std::size_t i = 0; i < dim; ++i) expect0 += q[i] * m[i];
    EXPECT_NEAR(ser[0], expect0, 1e-12);
}

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sclt/rng.hpp"

using namespace sclt;

TEST(Rng, SameKeySameStream) {
    Philox a(42, 7, 3), b(42, 7, 3);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, DistinctKeysDiffer) {
    std::set<std::uint32_t> first;
    for (std::uint64_t s = 0; s < 4; ++s)
        for (std::uint64_t t = 0; t < 4; ++t)
            for (std::uint64_t k = 0; k < 4; ++k) first.insert(Philox(s, t, k)());
    EXPECT_EQ(first.size(), 64u);
}

TEST(Rng, SplitmixReferenceValue) {
    // first output of the reference splitmix64 generator seeded with 0
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, UniformOpenInterval) {
    Philox g(1, 0, 0);
    double s = 0.0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        const double u = g.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
    }
    EXPECT_NEAR(s / N, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / N));
}

TEST(Rng, NormalMoments) {
    Philox g(2, 0, 0);
    const int N = 100000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < N; ++i) {
        const double x = g.normal();
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m1 /= N;
    m2 /= N;
    m4 /= N;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(N));
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / N));
    EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / N));
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sclt/stats.hpp"

using namespace sclt;

TEST(Stats, Moments) {
    const std::vector<double> x = {1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(mean(x), 2.5);
    EXPECT_DOUBLE_EQ(variance(x), 5.0 / 3);
    EXPECT_NEAR(skewness(x), 0.0, 1e-15);
    EXPECT_NEAR(pearson(x, {2, 4, 6, 8}), 1.0, 1e-15);
    EXPECT_NEAR(pearson(x, {4, 3, 2, 1}), -1.0, 1e-15);
}

TEST(Stats, BatchEstimates) {
    std::mt19937_64 g(1);
    std::normal_distribution<double> N(2.0, 3.0);
    std::vector<double> x(20000);
    for (double& v : x) v = N(g);
    const Estimate m = batch_mean(x);
    EXPECT_NEAR(m.value, 2.0, 4 * m.se);
    EXPECT_NEAR(m.se, 3.0 / std::sqrt(20000.0), 0.4 * m.se);
    const Estimate v = batch_variance(x);
    EXPECT_NEAR(v.value, 9.0, 4 * v.se);
    EXPECT_NEAR(v.se, 9.0 * std::sqrt(2.0 / 20000), 0.4 * v.se);
}

TEST(Stats, KolmogorovTail) {
    EXPECT_NEAR(kolmogorov_q(1.0), 0.26999967167735456, 1e-12);
    EXPECT_NEAR(kolmogorov_q(1.36), 0.0494, 1e-3);
    EXPECT_NEAR(kolmogorov_q(3.0), 0.0, 1e-7);
}

TEST(Stats, KsTwoSample) {
    const KsResult same = ks_two_sample({1, 2, 3, 4}, {1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(same.D, 0.0);
    const KsResult apart = ks_two_sample({1, 2, 3}, {10, 11, 12});
    EXPECT_DOUBLE_EQ(apart.D, 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3, 4}, {3.5, 5, 6, 7}).D, 0.75);
    std::mt19937_64 g(2);
    std::normal_distribution<double> N;
    std::vector<double> a(2000), b(2000), c(2000);
    for (int i = 0; i < 2000; ++i) a[i] = N(g), b[i] = N(g), c[i] = 0.3 + N(g);
    EXPECT_GT(ks_two_sample(a, b).p, 1e-3);
    EXPECT_LT(ks_two_sample(a, c).p, 1e-6);
}

TEST(Stats, Normality) {
    std::mt19937_64 g(3);
    std::normal_distribution<double> N;
    std::exponential_distribution<double> E;
    std::vector<double> a(2000), b(2000);
    for (int i = 0; i < 2000; ++i) a[i] = N(g), b[i] = E(g);
    const NormalityResult ra = normality_test(a);
    EXPECT_GT(ra.ad_p, 1e-3);
    EXPECT_LT(ra.anderson_darling, 1.5);
    EXPECT_LT(normality_test(b).ad_p, 1e-6);
    EXPECT_NEAR(normality_test(b).skew, 2.0, 0.5);
    EXPECT_THROW(normality_test(std::vector<double>(100, 1.0)), Error);
    EXPECT_THROW(normality_test(std::vector<double>(1000, 1.0)), Error);
}

TEST(Stats, NormalCdf) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
}

TEST(Stats, QuantileEdgesAndBins) {
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(i);
    const std::vector<double> e = quantile_edges(x, 4);
    ASSERT_EQ(e.size(), 5u);
    EXPECT_LE(e.front(), 0.0);
    EXPECT_GE(e.back(), 99.0);
    std::vector<int> counts(4, 0);
    for (double v : x) ++counts[bin_index(e, v)];
    for (int c : counts) EXPECT_EQ(c, 25);
}

TEST(Stats, JointVersusProduct) {
    std::mt19937_64 g(4);
    std::normal_distribution<double> N;
    std::vector<double> a(4000), b(4000);
    for (int i = 0; i < 4000; ++i) a[i] = N(g), b[i] = N(g);
    EXPECT_LT(joint_vs_product_distance(a, b), 0.01);
    EXPECT_GT(joint_vs_product_distance(a, a), 0.1);
}

TEST(Stats, LinearFit) {
    const LinearFit f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    const MatrixXd s = (MatrixXd(3, 2) << 1, 2, 2, 4, 3, 6).finished();
    const MatrixXd C = covariance_matrix(s);
    EXPECT_NEAR(C(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(C(0, 1), 2.0, 1e-14);
    EXPECT_NEAR(C(1, 1), 4.0, 1e-14);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sclt/ensemble.hpp"

using namespace sclt;

namespace {

struct Moments {
    double m1 = 0, m2 = 0, m4 = 0;
};

Moments draw_moments(const EntryLaw& law, int N, std::uint64_t seed) {
    Philox g(seed, 0, 0);
    Moments m;
    for (int i = 0; i < N; ++i) {
        const double x = law.draw(g);
        m.m1 += x;
        m.m2 += x * x;
        m.m4 += x * x * x * x;
    }
    m.m1 /= N;
    m.m2 /= N;
    m.m4 /= N;
    return m;
}

}  // namespace

class LawMoments : public ::testing::TestWithParam<std::string> {};

TEST_P(LawMoments, MeanVarianceFourthMoment) {
    const EntryLaw law = law_from_name(GetParam());
    const int N = 100000;
    const Moments m = draw_moments(law, N, 11);
    const double k4 = kappa4_of(law);
    const double e4 = 3.0 + k4;
    // Var chi^2 = E chi^4 - 1, Var chi^4 bounded by E chi^8 (<= 105 for these laws)
    EXPECT_NEAR(m.m1, 0.0, 4.0 / std::sqrt(N));
    EXPECT_NEAR(m.m2, 1.0, 4.0 * std::sqrt((e4 - 1.0) / N));
    EXPECT_NEAR(m.m4, e4, 4.0 * std::sqrt(105.0 / N));
}

INSTANTIATE_TEST_SUITE_P(BuiltIn, LawMoments, ::testing::Values("gaussian", "rademacher", "uniform"));

TEST(Ensemble, Kappa4Values) {
    EXPECT_DOUBLE_EQ(kappa4_of(EntryLaw::gaussian()), 0.0);
    EXPECT_DOUBLE_EQ(kappa4_of(EntryLaw::rademacher()), -2.0);
    EXPECT_NEAR(kappa4_of(EntryLaw::uniform()), -1.2, 1e-15);
}

TEST(Ensemble, CustomLawNeedsKappa4) {
    const EntryLaw law = EntryLaw::custom([](Philox& g) { return g.normal(); }, std::nullopt);
    EXPECT_THROW(kappa4_of(law), Error);
}

TEST(Ensemble, UnknownLawRejected) { EXPECT_THROW(law_from_name("cauchy"), Error); }

TEST(Ensemble, ReproducibleAndTrialDependent) {
    EnsembleSpec s;
    s.n = 20;
    s.seed = 99;
    const MatrixSample a = sample_iid(s, 3), b = sample_iid(s, 3), c = sample_iid(s, 4);
    EXPECT_TRUE((a.data.array() == b.data.array()).all());
    EXPECT_FALSE((a.data.array() == c.data.array()).all());
}

TEST(Ensemble, RealClassHasZeroImaginaryPart) {
    EnsembleSpec s;
    s.n = 30;
    EXPECT_EQ(sample_iid(s, 0).data.imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ensemble, RademacherSupport) {
    EnsembleSpec s;
    s.n = 25;
    s.law = EntryLaw::rademacher();
    const MatrixXd X = sample_iid(s, 0).real_data();
    EXPECT_NEAR((X.cwiseAbs().array() - 0.2).abs().maxCoeff(), 0.0, 1e-15);
}

TEST(Ensemble, EntryVarianceTwoByTwo) {
    EnsembleSpec s;
    s.n = 2;
    s.seed = 5;
    const int N = 100000;
    double acc = 0.0;
    for (int t = 0; t < N; ++t) acc += std::norm(sample_iid(s, t).data(0, 1));
    // x = chi/sqrt2, Var x^2 = (3-1)/4
    EXPECT_NEAR(acc / N, 0.5, 4.0 * std::sqrt(0.5 / N));
}

TEST(Ensemble, ComplexEntriesCircular) {
    EnsembleSpec s;
    s.n = 40;
    s.symmetry = Symmetry::complex;
    const MatrixXcd X = sample_iid(s, 0).data;
    const double N = 1600.0;
    const cplx pseudo = (X.array() * X.array()).sum() * 40.0 / N;  // E chi^2 = 0
    const double var = X.squaredNorm() * 40.0 / N;                  // E|chi|^2 = 1
    EXPECT_NEAR(var, 1.0, 4.0 / std::sqrt(N));
    EXPECT_LT(std::abs(pseudo), 4.0 / std::sqrt(N) * std::sqrt(2.0));
}

TEST(Ensemble, TraceSquareMeanIsOne) {
    EnsembleSpec s;
    s.n = 100;
    s.seed = 12;
    std::vector<double> v;
    for (int t = 0; t < 2000; ++t) v.push_back((sample_iid(s, t).real_data() * sample_iid(s, t).real_data()).trace());
    double m = 0, q = 0;
    for (double x : v) m += x;
    m /= v.size();
    for (double x : v) q += (x - m) * (x - m);
    const double se = std::sqrt(q / (v.size() - 1) / v.size());
    EXPECT_NEAR(m, 1.0, 3.0 * se);
}

TEST(Ensemble, OuZeroTimeIsIdentity) {
    EnsembleSpec s;
    s.n = 10;
    const MatrixSample X = sample_iid(s, 0);
    EXPECT_TRUE((ou_evolve(X, 0.0).X.array() == X.data.array()).all());
}

TEST(Ensemble, OuPreservesEntryVariance) {
    EnsembleSpec s;
    s.n = 4;
    const int N = 10000;
    double acc = 0.0;
    for (int t = 0; t < N; ++t) acc += std::norm(ou_evolve(sample_iid(s, t), 0.7).X(1, 2));
    EXPECT_NEAR(acc / N, 0.25, 4.0 * 0.25 * std::sqrt(2.0 / N));
}

TEST(Ensemble, OuSplitIsExact) {
    EnsembleSpec s;
    s.n = 6;
    const MatrixSample X = sample_iid(s, 2);
    const double tf = 0.3;
    const OuSplit sp = ou_split(X, tf);
    EXPECT_NEAR(sp.c_tf, 1.0 - std::exp(-tf), 1e-15);
    // same stream as ou_evolve, so the endpoint reproduces the OU transition
    EXPECT_LT((sp.endpoint() - ou_evolve(X, tf).X).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(sp.c, 1.0, tf);
}

TEST(Ensemble, BrownianVarianceAccumulates) {
    EnsembleSpec s;
    s.n = 3;
    const int N = 20000, k = 4;
    const double dt = 0.05;
    double acc = 0.0;
    for (int t = 0; t < N; ++t) {
        const MatrixSample X0 = sample_iid(s, t);
        FlowState st = start_flow(X0);
        for (int j = 0; j < k; ++j) st = brownian_step(st, dt);
        acc += std::norm(st.X(0, 0) - X0.data(0, 0));
    }
    const double expect = k * dt / 3.0;
    EXPECT_NEAR(acc / N, expect, 4.0 * expect * std::sqrt(2.0 / N));
}

TEST(Ensemble, BrownianIncrementsIndependent) {
    EnsembleSpec s;
    s.n = 5;
    const int N = 5000;
    double sab = 0, saa = 0, sbb = 0;
    for (int t = 0; t < N; ++t) {
        FlowState st = start_flow(sample_iid(s, t));
        const FlowState a = brownian_step(st, 0.1);
        const FlowState b = brownian_step(a, 0.1);
        const double da = (a.X - st.X).trace().real(), db = (b.X - a.X).trace().real();
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 4.0 / std::sqrt(N));
}

TEST(Ensemble, SharedNoiseDeterministic) {
    EnsembleSpec s;
    s.n = 4;
    FlowState st = start_flow(sample_iid(s, 0));
    Philox g(1, 2, 3);
    const MatrixXcd G = standard_gaussian(4, Symmetry::real, g);
    EXPECT_TRUE((brownian_step(st, 0.2, &G).X.array() == brownian_step(st, 0.2, &G).X.array()).all());
}

#include <gtest/gtest.h>

#include <cmath>

#include "sclt/checks.hpp"
#include "sclt/dbm.hpp"
#include "sclt/ensemble.hpp"
#include "sclt/spectral.hpp"

using namespace sclt;

namespace {

VectorXd spaced(int n, double gap = 0.3) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = gap * (i + 1);
    return x;
}

}  // namespace

TEST(Dbm, DriftHandComputed) {
    VectorXd x(2);
    x << 1.0, 2.0;
    const VectorXd d = drift_explicit(x, MatrixXd::Zero(2, 2), 0.0);
    // (1/4)[1/(1-2) + 1/(1+2)] + 1/8
    EXPECT_NEAR(d(0), -1.0 / 24, 1e-15);
    // (1/4)[1/(2-1) + 1/(2+1)] + 1/16
    EXPECT_NEAR(d(1), 1.0 / 3 + 1.0 / 16, 1e-15);
}

TEST(Dbm, DriftIdentities) {
    for (const auto& r : check_dbm_drift(17)) EXPECT_TRUE(r.passed) << r.name << " " << r.measured;
}

TEST(Dbm, StateLayout) {
    const DbmState s = make_state(spaced(3), DbmKind::raw);
    EXPECT_DOUBLE_EQ(s.at(2), 0.6);
    EXPECT_DOUBLE_EQ(s.at(-2), -0.6);
    const VectorXd sp = s.signed_particles();
    for (int k = 1; k < sp.size(); ++k) EXPECT_LT(sp(k - 1), sp(k));
    EXPECT_TRUE(s.ordered());
    VectorXd bad = spaced(3);
    std::swap(bad(0), bad(1));
    EXPECT_THROW(make_state(bad, DbmKind::raw), Error);
    DbmState t = s;
    t.x(1) = t.x(0);
    EXPECT_FALSE(t.ordered());
}

TEST(Dbm, SignedLambdaStructure) {
    MatrixXd K(2, 2);
    K << 0.5, 0.1, 0.1, -0.2;
    const MatrixXd L = CorrelationModel::from_kernel(K, 1e300).signed_lambda();
    // rows ordered -2,-1,1,2: Lambda_{i,j} = s_i s_j K_{|i|,|j|}
    EXPECT_DOUBLE_EQ(L(2, 3), 0.1);
    EXPECT_DOUBLE_EQ(L(1, 3), -0.1);
    EXPECT_DOUBLE_EQ(L(1, 2), -0.5);
    EXPECT_DOUBLE_EQ(L(0, 0), -0.2);
    EXPECT_TRUE(L.isApprox(L.transpose()));
}

TEST(Dbm, CutoffLogic) {
    MatrixXd K = MatrixXd::Constant(3, 3, 0.1);
    const CorrelationModel on = CorrelationModel::from_kernel(K, 0.2);
    EXPECT_TRUE(on.cutoff_active);
    EXPECT_DOUBLE_EQ(on.A, 0.1);
    EXPECT_TRUE(on.K_cut().isApprox(K));
    K(0, 2) = K(2, 0) = -0.5;
    const CorrelationModel off = CorrelationModel::from_kernel(K, 0.2);
    EXPECT_FALSE(off.cutoff_active);
    EXPECT_TRUE(off.K_cut().isZero());
    EXPECT_TRUE(noise_covariance(off, DbmKind::regularized).isApprox(0.5 * MatrixXd::Identity(3, 3)));
    EXPECT_TRUE(noise_covariance(off, DbmKind::raw).isApprox(0.5 * (MatrixXd::Identity(3, 3) + K)));
    EXPECT_TRUE(noise_covariance(off, DbmKind::ginibre).isApprox(MatrixXd::Identity(3, 3)));
    // entry (0,2): 0.2 * 0.1 + 0.8 * (-0.5)
    const CorrelationModel mid = CorrelationModel::interpolate(on, off, 0.8);
    EXPECT_NEAR(mid.A, 0.38, 1e-15);
    EXPECT_FALSE(mid.cutoff_active);
}

TEST(Dbm, PsdSqrt) {
    MatrixXd A = MatrixXd::Random(5, 5);
    const MatrixXd C = A * A.transpose();
    NoiseReport rep;
    const MatrixXd S = psd_sqrt(C, &rep);
    EXPECT_TRUE((S * S).isApprox(C, 1e-10));
    EXPECT_TRUE(S.isApprox(S.transpose()));
    EXPECT_FALSE(rep.inconsistent);
    MatrixXd D = MatrixXd::Identity(2, 2);
    D(1, 1) = -0.5;
    psd_sqrt(D, &rep);
    EXPECT_TRUE(rep.inconsistent);
    EXPECT_NEAR(rep.max_adjustment, 0.5, 1e-12);
    EXPECT_NEAR(rep.min_eigenvalue, -0.5, 1e-12);
    const MatrixXd Si = psd_inv_sqrt(C);
    EXPECT_TRUE((Si * C * Si).isApprox(MatrixXd::Identity(5, 5), 1e-8));
}

TEST(Dbm, StepCoefficients) {
    const DbmExponents ex;
    const int n = 64;
    const double reg = 1.0 / std::sqrt(n * (1.0 + std::pow(n, -ex.omega_r)));
    EXPECT_DOUBLE_EQ(step_coefficients(DbmKind::raw, 0, n, ex).noise_scale, 1.0 / 8.0);
    EXPECT_DOUBLE_EQ(step_coefficients(DbmKind::regularized, 0, n, ex).noise_scale, reg);
    EXPECT_DOUBLE_EQ(step_coefficients(DbmKind::interpolated, 0.3, n, ex).lambda_weight, 0.3);
    EXPECT_DOUBLE_EQ(step_coefficients(DbmKind::ginibre, 0, n, ex).noise_scale, 1.0 / std::sqrt(128.0));
}

TEST(Dbm, InterpolatedAtZeroEqualsRegularized) {
    const int n = 6;
    MatrixXd K = 0.05 * MatrixXd::Random(n, n);
    K = (K + K.transpose()).eval();
    const CorrelationModel m = CorrelationModel::from_kernel(K, 1.0);
    Philox g(1, 0, 0);
    const NoiseBlock nb = make_noise(m, DbmKind::regularized, 1e-3, g);
    Philox b1(2, 0, 0), b2(2, 0, 0);
    const DbmState a = step(make_state(spaced(n), DbmKind::regularized), m, 1e-3, nb, b1);
    const DbmState c = step(make_state(spaced(n), DbmKind::interpolated, 0.0), m, 1e-3, nb, b2);
    for (int i = 0; i < n; ++i) EXPECT_EQ(a.x(i), c.x(i));
    EXPECT_DOUBLE_EQ(a.t, 1e-3);
}

TEST(Dbm, StepKeepsOrderWithLargeSteps) {
    const int n = 8;
    const CorrelationModel m = CorrelationModel::zero(n);
    DbmState s = make_state(spaced(n, 0.01), DbmKind::raw);
    int refined = 0;
    for (int k = 0; k < 50; ++k) {
        Philox g(3, 0, k), b(4, 0, k);
        const NoiseBlock nb = make_noise(m, DbmKind::raw, 0.05, g);
        StepStats st;
        s = step(s, m, 0.05, nb, b, {}, &st);
        refined += st.halvings > 0;
        ASSERT_TRUE(s.ordered());
        ASSERT_GT(s.x(0), 0.0);
    }
    EXPECT_GT(refined, 0);
    EXPECT_NEAR(s.t, 2.5, 1e-12);
}

TEST(Dbm, NoiseCovarianceFromMake) {
    const int n = 3, N = 40000;
    MatrixXd K(n, n);
    K << 0.4, 0.2, -0.1, 0.2, -0.3, 0.05, -0.1, 0.05, 0.1;
    const CorrelationModel m = CorrelationModel::from_kernel(K, 1e300);
    const MatrixXd C = noise_covariance(m, DbmKind::raw);
    MatrixXd S = MatrixXd::Zero(n, n);
    for (int k = 0; k < N; ++k) {
        Philox g(5, 0, k);
        const VectorXd d = make_noise(m, DbmKind::raw, 2.0, g).db;
        S += d * d.transpose();
    }
    S /= 2.0 * N;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            EXPECT_NEAR(S(i, j), C(i, j), 5 * std::sqrt((C(i, i) * C(j, j) + C(i, j) * C(i, j)) / N));
}

TEST(Dbm, ProjectedIncrementMatchesFormula) {
    EnsembleSpec spec;
    spec.n = 5;
    spec.seed = 11;
    const SpectralDecomposition d = decompose(hermitize(sample_iid(spec, 0).data, cplx(0.2, 0.1)));
    Philox g(6, 0, 0);
    const MatrixXcd dB = standard_gaussian(5, Symmetry::real, g);
    const VectorXd db = project_increment(d, dB);
    for (int i = 0; i < 5; ++i) {
        const cplx ip = d.U.col(i).dot(dB * d.V.col(i));
        EXPECT_NEAR(db(i), 2.0 * ip.real(), 1e-12);
    }
}

TEST(Dbm, CouplingDistance) {
    const DbmState a = make_state(spaced(4), DbmKind::raw);
    DbmState b = a;
    b.x(3) += 0.5;
    b.x(0) += 0.1;
    EXPECT_DOUBLE_EQ(coupling_distance(a, b, 2), 0.1);
    EXPECT_DOUBLE_EQ(coupling_distance(a, b, 4), 0.5);
    EXPECT_DOUBLE_EQ(coupling_distance(a, a, 4, 2.0, 2.0), 0.0);
}

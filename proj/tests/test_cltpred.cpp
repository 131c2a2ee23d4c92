#include <gtest/gtest.h>

#include <cmath>

#include "sclt/checks.hpp"
#include "sclt/cltpred.hpp"
#include "sclt/ensemble.hpp"
#include "sclt/harness.hpp"

using namespace sclt;

namespace {

TestFunction trig_poly() {
    TestFunction f;
    f.name = "trig";
    // boundary trace 0.5 + e^{i theta} - 0.25i e^{-3 i theta}
    f.value = [](cplx z) { return 0.5 + z - cplx(0.0, 0.25) * std::pow(std::conj(z), 3); };
    return f;
}

// Gamma(n-1, s)/Gamma(n-1) for integer n via the finite Poisson sum
double gamma_q_int(int n, double s) {
    double term = std::exp(-s), acc = 0.0;
    for (int k = 0; k <= n - 2; ++k) {
        acc += term;
        term *= s / (k + 1);
    }
    return acc;
}

}  // namespace

TEST(CltPred, BoundaryFourierOfTrigPolynomial) {
    const BoundaryFourier b = boundary_fourier(trig_poly());
    for (int k = -b.K; k <= b.K; ++k) {
        const cplx expect = k == 0 ? cplx(0.5) : k == 1 ? cplx(1.0) : k == -3 ? cplx(0.0, -0.25) : cplx(0.0);
        ASSERT_LT(std::abs(b.at(k) - expect), 1e-10) << k;
    }
}

TEST(CltPred, HalfSobolevExamples) {
    EXPECT_NEAR(std::abs(h_half_inner(re_zpow(1), re_zpow(1)).value - 0.5), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(h_half_inner(re_zpow(2), re_zpow(2)).value - 1.0), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(h_half_inner(constant(3.0), constant(3.0)).value), 0.0, 1e-12);
    // sum |k| |h(k)|^2 for the trig polynomial: 1 + 3/16
    EXPECT_NEAR(std::abs(h_half_inner(trig_poly(), trig_poly()).value - 1.1875), 0.0, 1e-10);
    EXPECT_FALSE(h_half_inner(re_zpow(1), re_zpow(1)).tail_flag);
}

TEST(CltPred, GradientExamples) {
    EXPECT_NEAR(grad_inner(re_zpow(1), re_zpow(1)).value.real(), kPi, 1e-8);
    EXPECT_NEAR(grad_inner(re_zpow(2), re_zpow(2)).value.real(), 2 * kPi, 1e-8);
    EXPECT_NEAR(std::abs(grad_inner(constant(1.0), constant(1.0)).value), 0.0, 1e-12);
}

TEST(CltPred, ExpectationPolynomials) {
    const ExpectationTerms t2 = expectation_E(zpow(2), 0.0, 50);
    EXPECT_NEAR(std::abs(t2.bulk), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(t2.singular - 0.25), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(t2.kappa4), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(t2.boundary), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(t2.arcsine - 0.25), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(t2.endpoint - 0.5), 0.0, 1e-14);
    const ExpectationTerms t4 = expectation_E(zpow(4), 0.0, 50);
    EXPECT_NEAR(std::abs(t4.singular - 5.0 / 16), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(t4.arcsine - 3.0 / 16), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(t4.total() - 1.0), 0.0, 1e-6);
    for (int k : {1, 3, 5, 7}) EXPECT_NEAR(std::abs(expectation_E(zpow(k), -1.3, 50).total()), 0.0, 1e-8) << k;
    for (const auto& r : check_quadrature()) EXPECT_TRUE(r.passed) << r.name;
}

TEST(CltPred, BulkTermScalesWithN) {
    const ExpectationTerms t = expectation_E(abs2(), 0.0, 100);
    EXPECT_NEAR(t.bulk.real(), 100.0 / 2.0, 1e-8);  // (n/pi) int |z|^2 = n/2
}

TEST(CltPred, VarianceExamples) {
    for (double k4 : {0.0, -2.0, 1.7}) EXPECT_NEAR(variance_V(zpow(1), k4), 1.0, 1e-8);
    for (int k = 1; k <= 5; ++k) {
        EXPECT_NEAR(variance_V(zpow(k), 0.0), k, 1e-6) << k;
        EXPECT_NEAR(analytic_dirichlet(zpow(k)), k, 1e-6) << k;
        // L(Re z^k) = L(z^k) and L(conj z^k) = conj L(z^k) for real matrices
        EXPECT_NEAR(variance_V(re_zpow(k), 0.0), k, 1e-6) << k;
        EXPECT_NEAR(variance_V(conjpow(k), 0.0), k, 1e-6) << k;
    }
    EXPECT_NEAR(variance_V(constant(2.0), 0.5), 0.0, 1e-12);
    // <|z|^2>_D - <|z|^2>_dD = -1/2
    EXPECT_NEAR(variance_V(abs2(), 0.0), 1.0, 1e-6);
    EXPECT_NEAR(variance_V(abs2(), -2.0), 0.5, 1e-6);
}

TEST(CltPred, SymmetrizationInvariance) {
    const TestFunction f = parse_test_function("bump(0.2+0.3i,0.5)");
    const TestFunction g = parse_test_function("gauss(-0.1+0.4i,0.3)");
    EXPECT_LT(std::abs(expectation_E(f, -1.0, 10).total() - expectation_E(psym(f), -1.0, 10).total()), 1e-8);
    EXPECT_LT(std::abs(covariance_C(g, f, 0.6).total() - covariance_C(psym(g), psym(f), 0.6).total()), 1e-8);
}

TEST(CltPred, HermitianSymmetryAndConjugation) {
    const TestFunction f = parse_test_function("bump(0.2+0.3i,0.5)");
    const TestFunction g = zpow(2);
    const cplx fg = covariance_C(f, g, -1.5).total(), gf = covariance_C(g, f, -1.5).total();
    EXPECT_LT(std::abs(fg - std::conj(gf)), 1e-8);
    EXPECT_GE(variance_V(f, -2.0), -1e-8);
    // the kappa4 term is conjugate-linear in g
    TestFunction ig;
    ig.name = "i|z|^2";
    ig.value = [](cplx z) { return cplx(0.0, std::norm(z)); };
    const TestFunction a2 = abs2();
    EXPECT_LT(std::abs(covariance_C(ig, a2, 1.0).kappa4 - cplx(0.0, -1.0) * covariance_C(a2, a2, 1.0).kappa4), 1e-8);
}

TEST(CltPred, RealVersusComplexRelation) {
    for (const char* name : {"bump(0.2+0.3i,0.5)", "abs2", "z^2", "gauss(0.3,0.4)"}) {
        const TestFunction f = parse_test_function(name);
        for (double k4 : {0.0, -1.2, 2.0}) {
            const double lhs = variance_V(f, k4);
            const double rhs = 2.0 * complex_V1(psym(f)) + k4 * complex_V2(f);
            EXPECT_NEAR(lhs, rhs, 1e-8) << name << " " << k4;
        }
    }
}

TEST(CltPred, GaussianFreeFieldConsistency) {
    const TestFunction f = parse_test_function("gauss(0.2,0.4)");
    const CovarianceTerms c = covariance_C(f, f, 0.0);
    const double h10 = grad_inner(f, f).value.real();
    const double h12 = h_half_inner(f, f).value.real();
    EXPECT_NEAR(h10 + 2 * kPi * h12, 2 * kPi * (c.gradient + c.h_half).real(), 1e-8);
}

TEST(CltPred, PredictBreakdown) {
    const PredictedMoments p = predict(zpow(2), 0.0, 100);
    EXPECT_NEAR(std::abs(p.E_f - 1.0), 0.0, 1e-6);
    EXPECT_NEAR(p.V_f, 2.0, 1e-6);
    EXPECT_EQ(p.to_json()["function"], "z^2");
}

TEST(CltPred, GirkoIdentity) {
    EnsembleSpec s;
    s.n = 100;
    s.seed = 3;
    const MatrixSample X = sample_iid(s, 0);
    const TestFunction f = parse_test_function("bump(0.1+0.2i,0.6)");
    const VectorXcd ev = nonhermitian_eigenvalues(X);
    cplx direct = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) direct += f(ev(i));
    const GirkoResult r = girko_evaluate(X.data, f);
    EXPECT_LT(std::abs(r.value - direct) / std::max(1.0, std::abs(direct)), 1e-2);
    EXPECT_GT(r.evaluated_points, 0);
    // support away from the spectrum
    const TestFunction far = parse_test_function("bump(4+4i,0.5)");
    EXPECT_LT(std::abs(girko_evaluate(X.data, far).value), 1e-2);
}

TEST(CltPred, EdelmanDensity) {
    // finite Poisson sum for the incomplete gamma ratio
    for (cplx z : {cplx(0.3, 0.2), cplx(-0.7, 0.05), cplx(0.9, 0.6)}) {
        const int n = 12;
        const double y = std::abs(z.imag());
        const double direct = std::sqrt(2.0 * n / kPi) * y * std::exp(2.0 * n * y * y) * std::erfc(std::sqrt(2.0 * n) * y) *
                              gamma_q_int(n, n * std::norm(z));
        EXPECT_NEAR(edelman_density(z, n), direct, 1e-12 * std::max(1.0, direct));
    }
    const int n = 500;
    const cplx z(0.3, 0.4);
    const double approx = 1.0 / kPi - 1.0 / (4 * kPi * n * 0.16);
    EXPECT_NEAR(edelman_density(z, n) / approx, 1.0, 0.02);
    EXPECT_LT(edelman_density(cplx(0.2, 1e-9), n), 1e-6);
    EXPECT_LT(edelman_density(cplx(0.9, 1.2), n), 1e-6);
    EXPECT_THROW(edelman_density(0.5, n), Error);
    // large-argument branch continuous with the direct branch
    const double y20 = 20.0 / std::sqrt(2.0 * n);
    EXPECT_NEAR(edelman_density(cplx(0.0, y20 * (1 - 1e-9)), n), edelman_density(cplx(0.0, y20 * (1 + 1e-9)), n), 1e-8);
}

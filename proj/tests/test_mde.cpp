#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sclt/mde.hpp"

using namespace sclt;

namespace {

const cplx I(0.0, 1.0);

// semicircle on [-2, 2]: int_0^g sqrt(4 - x^2)/(2 pi)
double semicircle_cdf0(double g) { return (0.5 * g * std::sqrt(4.0 - g * g) + 2.0 * std::asin(g / 2.0)) / (2.0 * kPi); }

}  // namespace

TEST(Mde, SemicircleAtOrigin) {
    const MdeSolution s = solve_m(0.0, I);
    EXPECT_NEAR(std::abs(s.m - I * (std::sqrt(5.0) - 1.0) / 2.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.u + s.m * s.m), 0.0, 1e-14);
    EXPECT_NEAR(s.m.imag() / kPi, 0.19673, 5e-6);
}

TEST(Mde, ResidualAndBranchOnRandomGrid) {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> r(0.0, 2.0), th(0.0, 2 * kPi), E(-5.0, 5.0), le(std::log(1e-3), std::log(1e2));
    for (int k = 0; k < 1000; ++k) {
        const cplx z = std::polar(r(g), th(g));
        const cplx w(E(g), std::exp(le(g)));
        const MdeSolution s = solve_m(z, w);
        ASSERT_LE(s.residual(), 1e-12) << z << " " << w;
        ASSERT_GT(s.m.imag() * w.imag(), 0.0);
        ASSERT_LT(s.mubound(), 1.0);
        ASSERT_LE(std::abs(s.u), s.mubound() + 1e-12);
        ASSERT_LE(std::abs(s.m), 1.0 + 1e-8);
    }
}

TEST(Mde, LowerHalfPlaneIsConjugate) {
    const cplx z(0.3, 0.7), w(0.4, 0.2);
    EXPECT_LT(std::abs(solve_m(z, std::conj(w)).m - std::conj(solve_m(z, w).m)), 1e-13);
}

TEST(Mde, ImaginaryAxisGivesImaginaryM) {
    for (double eta : {1e-4, 0.1, 1.0, 10.0}) {
        const MdeSolution s = solve_m(cplx(0.6, -0.2), I * eta);
        EXPECT_LT(std::abs(s.m.real()), 1e-13 * std::abs(s.m));
    }
}

TEST(Mde, RealAxisRequiresLimit) { EXPECT_THROW(solve_m(0.2, 1.0), Error); }

TEST(Mde, DensityAtOriginInsideDisk) {
    const MdeSolution s = solve_m_real_axis(0.5, 0.0);
    EXPECT_NEAR(s.m.imag(), std::sqrt(0.75), 1e-8);
    EXPECT_NEAR(density(0.5, 0.0), 0.27566, 5e-6);
    EXPECT_NEAR(std::abs(s.u - 1.0), 0.0, 1e-6);
}

TEST(Mde, GapOutsideDisk) {
    EXPECT_NEAR(density(1.5, 0.0), 0.0, 1e-8);
    const EdgeData e = edges(1.5);
    ASSERT_TRUE(e.e_minus.has_value());
    EXPECT_GT(*e.e_minus, 0.0);
    EXPECT_LT(*e.e_minus, e.e_plus);
    const double mid = 0.5 * (std::sqrt(*e.e_minus) + std::sqrt(e.e_plus));
    EXPECT_GT(density(1.5, mid), 0.0);
    EXPECT_NEAR(density(1.5, 0.99 * std::sqrt(*e.e_minus)), 0.0, 1e-6);
}

TEST(Mde, EdgeFormula) {
    EXPECT_NEAR(edges(0.5).e_plus, 4.848076211353316, 1e-12);
    EXPECT_NEAR(std::sqrt(edges(cplx(0.0, 1e-4)).e_plus), 2.0, 1e-6);
    EXPECT_TRUE(edges(0.0).semicircle_limit);
    // density vanishes just outside the upper edge and not just inside
    const double top = std::sqrt(edges(cplx(0.3, 0.4)).e_plus);
    EXPECT_NEAR(density(cplx(0.3, 0.4), top * 1.01), 0.0, 1e-6);
    EXPECT_GT(density(cplx(0.3, 0.4), top * 0.99), 1e-3);
}

TEST(Mde, EtaDerivativeMatchesClosedForm) {
    const MdeSolution s = solve_m(0.0, I);
    const EtaDerivatives d = m_eta_derivatives(s);
    // m(i eta) = i (sqrt(eta^2 + 4) - eta)/2
    const cplx exact = I * (1.0 / std::sqrt(5.0) - 1.0) / 2.0;
    EXPECT_LT(std::abs(d.dm - exact), 1e-12);
    // finite differences of the solver itself at |z| > 0
    const cplx z(0.4, 0.3);
    const double eta = 0.7, h = 1e-5;
    const cplx fd = (solve_m(z, I * (eta + h)).m - solve_m(z, I * (eta - h)).m) / (2 * h);
    EXPECT_LT(std::abs(m_eta_derivatives(solve_m(z, I * eta)).dm - fd), 1e-8);
}

TEST(Mde, EtaDerivativeDecaysAndIsRotationInvariant) {
    EXPECT_LT(std::abs(m_eta_derivatives(solve_m(0.3, I * 100.0)).dm), 1e-3);
    const cplx a = m_eta_derivatives(solve_m(cplx(0.5, 0.0), I * 0.3)).dm;
    const cplx b = m_eta_derivatives(solve_m(std::polar(0.5, 1.1), I * 0.3)).dm;
    EXPECT_LT(std::abs(a - b), 1e-12);
}

TEST(Mde, SaturationAtSmallEta) {
    for (double r : {0.1, 0.5, 0.9}) EXPECT_NEAR(solve_m(r, I * 1e-6).mubound(), 1.0, 1e-4);
}

TEST(Mde, SemicircleQuantiles) {
    const int n = 50;
    const Quantiles q = quantiles(0.0, n);
    for (int i = 1; i <= n; ++i) {
        EXPECT_NEAR(semicircle_cdf0(q.gamma(i)), i / (2.0 * n), 1e-8) << i;
        EXPECT_EQ(q.gamma(-i), -q.gamma(i));
        if (i > 1) EXPECT_GT(q.gamma(i), q.gamma(i - 1));
    }
}

TEST(Mde, QuantilesNearOriginAreLinear) {
    const int n = 10000;
    const cplx z(0.2, 0.1);
    const Quantiles q = quantiles(z, n);
    const double rho0 = density(z, 0.0);
    // int_0^gamma_i rho = i/(2n) and rho is continuous at 0
    for (int i = 1; i <= 100; i += 9) EXPECT_NEAR(q.gamma(i) * 2.0 * n * rho0 / i, 1.0, 0.01);
}

TEST(Mde, FlowDensity) {
    const cplx z(0.2, -0.5);
    EXPECT_NEAR(flow_density(z, 0.0, 0.3), density(z, 0.3), 1e-12);
    EXPECT_NEAR(flow_density(0.0, 3.0, 0.0), 1.0 / (2.0 * kPi), 1e-8);
    for (double t : {0.0, 0.4, 2.0}) {
        const double s = std::sqrt(1.0 + t);
        const EdgeData e = edges(z / s);
        boost::math::quadrature::tanh_sinh<double> ts;
        const double mass = 2.0 * ts.integrate([&](double x) { return flow_density(z, t, x); }, 0.0, s * std::sqrt(e.e_plus));
        EXPECT_NEAR(mass, 1.0, 1e-7) << t;
    }
}

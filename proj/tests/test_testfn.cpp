#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sclt/testfn.hpp"

using namespace sclt;

namespace {

cplx random_point(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    return {u(g), u(g)};
}

}  // namespace

TEST(TestFunction, ParseGrammar) {
    const cplx z(0.3, -0.7);
    EXPECT_LT(std::abs(parse_test_function("z^3")(z) - z * z * z), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("z")(z) - z), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("conj(z)^2")(z) - std::conj(z * z)), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("re(z^2)")(z) - (z * z).real()), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("|z|^2")(z) - std::norm(z)), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("abs2")(z) - std::norm(z)), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("const(2-1i)")(z) - cplx(2, -1)), 1e-15);
    EXPECT_LT(std::abs(parse_test_function("gauss(0.1+0.2i, 0.5)")(cplx(0.1, 0.2)) - 1.0), 1e-15);
    const TestFunction b = parse_test_function("bump(0.1+0.2i,0.6)");
    EXPECT_NEAR(b(cplx(0.1, 0.2)).real(), 1.0, 1e-15);
    EXPECT_EQ(b(cplx(0.8, 0.2)), cplx(0.0));
    EXPECT_DOUBLE_EQ(b.support_radius, 0.6);
}

TEST(TestFunction, ParseErrors) {
    for (const char* bad : {"sin(z)", "z^", "bump(0,)", "bump(0,-1)", "", "z^-2"}) {
        EXPECT_THROW(parse_test_function(bad), Error) << bad;
    }
}

TEST(TestFunction, ComplexLiterals) {
    EXPECT_EQ(parse_complex("0.3+0.5i"), cplx(0.3, 0.5));
    EXPECT_EQ(parse_complex("-1i"), cplx(0.0, -1.0));
    EXPECT_EQ(parse_complex("i"), cplx(0.0, 1.0));
    EXPECT_EQ(parse_complex("2"), cplx(2.0, 0.0));
    EXPECT_EQ(parse_complex("0+0i"), cplx(0.0, 0.0));
    EXPECT_EQ(parse_complex(format_complex(cplx(0.25, -0.125))), cplx(0.25, -0.125));
}

TEST(TestFunction, AnalyticGradientsMatchDifferences) {
    std::mt19937_64 g(1);
    for (const char* name : {"z^3", "conj(z)^2", "re(z^4)", "abs2", "bump(0.1+0.2i,0.6)", "gauss(-0.2,0.4)"}) {
        TestFunction f = parse_test_function(name);
        ASSERT_FALSE(f.gradient_is_fd()) << name;
        TestFunction fd = f;
        fd.grad = nullptr;
        fd.laplacian = nullptr;
        for (int k = 0; k < 50; ++k) {
            const cplx z = random_point(g);
            const auto a = f.gradient(z), b = fd.gradient(z);
            EXPECT_LT(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]), 1e-7) << name << " " << z;
            EXPECT_LT(std::abs(f.lap(z) - fd.lap(z)), 1e-4) << name << " " << z;
        }
    }
}

TEST(TestFunction, Psym) {
    std::mt19937_64 g(2);
    const TestFunction f = psym(zpow(1));
    for (int k = 0; k < 100; ++k) {
        const cplx z = random_point(g);
        EXPECT_LT(std::abs(f(z) - z.real()), 1e-15);
    }
    const TestFunction r = re_zpow(3), pr = psym(r), h = parse_test_function("bump(0.3+0.4i,0.5)");
    const TestFunction ph = psym(h), pph = psym(ph);
    for (int k = 0; k < 1000; ++k) {
        const cplx z = random_point(g);
        EXPECT_LT(std::abs(pr(z) - r(z)), 1e-15);
        EXPECT_LT(std::abs(pph(z) - ph(z)), 1e-15);
        const auto a = ph.gradient(z), b = pph.gradient(z);
        EXPECT_LT(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]), 1e-14);
    }
}

TEST(TestFunction, DzOfAnalytic) {
    const TestFunction f = zpow(3);
    const cplx z(0.4, 0.2);
    EXPECT_LT(std::abs(f.dz(z) - 3.0 * z * z), 1e-13);
    EXPECT_LT(std::abs(conjpow(3).dz(z)), 1e-13);
}

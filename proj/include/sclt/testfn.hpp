#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>

#include "sclt/common.hpp"

namespace sclt {

enum class Smoothness { analytic, C2, C2_symmetric };

struct TestFunction {
    using Grad = std::array<cplx, 2>;  // (d/dx f, d/dy f)

    std::string name;
    std::function<cplx(cplx)> value;
    std::function<Grad(cplx)> grad;        // optional
    std::function<cplx(cplx)> laplacian;   // optional
    Smoothness hint = Smoothness::C2;
    cplx support_center = 0.0;
    double support_radius = std::numeric_limits<double>::infinity();

    static constexpr double fd_step = 1e-5;

    cplx operator()(cplx z) const { return value(z); }
    Grad gradient(cplx z) const;  // analytic if available, else central differences
    cplx lap(cplx z) const;
    bool gradient_is_fd() const { return !grad; }
    bool laplacian_is_fd() const { return !laplacian; }
    // d/dz f = (f_x - i f_y)/2
    cplx dz(cplx z) const;
};

TestFunction zpow(int k);
TestFunction conjpow(int k);
TestFunction re_zpow(int k);
TestFunction abs2();
TestFunction constant(cplx c);
// exp(1 - 1/(1 - |z-c|^2/r^2)) inside the disk of radius r around c, 0 outside.
TestFunction bump(cplx c, double r);
// exp(-|z-c|^2 / (2 s^2))
TestFunction gauss(cplx c, double s);

// (f(z) + f(conj z))/2
TestFunction psym(const TestFunction& f);

// Grammar: z^k | z | conj(z)^k | re(z^k) | abs2 | |z|^2 | bump(c,r) | gauss(c,s) | const(c)
TestFunction parse_test_function(const std::string& text);

// Complex literal such as 0.3+0.5i, -1i, 2, i.
cplx parse_complex(const std::string& text);
std::string format_complex(cplx z, int precision = 6);

}  // namespace sclt

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sclt/common.hpp"

namespace sclt {

// Solution of -1/m = w + m - |z|^2/(w + m) on the branch Im m * Im w > 0.
struct MdeSolution {
    cplx z;
    cplx w;
    cplx m;
    cplx u;
    double rho = 0.0;
    Eigen::Matrix2cd M;  // [[m, -z u], [-conj(z) u, m]]

    double residual() const;
    double mubound() const { return std::norm(m) + std::norm(u) * std::norm(z); }
};

MdeSolution solve_m(cplx z, cplx w);

// Boundary value w = E + i0 by quadratic extrapolation from
// eta in {1e-7, 1e-8, 1e-9}.
MdeSolution solve_m_real_axis(cplx z, double E);

// Density of states of H^z at a real energy.
double density(cplx z, double E);

struct EtaDerivatives {
    cplx dm;  // d m / d eta along w = i eta
    cplx du;
};

// Implicit differentiation of the cubic along w = i eta.
EtaDerivatives m_eta_derivatives(const MdeSolution& sol);

struct Quantiles {
    cplx z;
    int n = 0;
    std::vector<double> gamma_pos;  // gamma_1 .. gamma_n

    double gamma(int i) const;  // signed index, i != 0
};

// i/(2n) = int_0^{gamma_i} rho^z, i = 1..n (rho has unit total mass, so half
// of it lies on the positive axis).
Quantiles quantiles(cplx z, int n);

// int_0^x rho^z.
double cumulative_density(cplx z, double x);

struct EdgeData {
    cplx z;
    double e_plus = 0.0;
    std::optional<double> e_minus;
    bool semicircle_limit = false;  // z = 0 reported as the +-2 limit
};

EdgeData edges(cplx z);

// Singular-value density of X_t - z when X_t has entry variance (1 + t)/n.
double flow_density(cplx z, double t, double x);

// Writes (x, rho) rows for plotting.
void write_density_csv(cplx z, double t, double x_max, int points, const std::string& path);

}  // namespace sclt

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sclt/common.hpp"
#include "sclt/testfn.hpp"

namespace sclt {

// Fourier coefficients h^(k), |k| <= K, of the boundary trace h(e^{i theta}).
struct BoundaryFourier {
    int K = 512;
    int N = 4096;
    std::vector<cplx> coeffs;  // index k + K

    cplx at(int k) const { return std::abs(k) <= K ? coeffs[k + K] : cplx(0.0); }
};

BoundaryFourier boundary_fourier(const TestFunction& f, int K = 512, int N = 4096);

struct InnerProduct {
    cplx value;
    double tail = 0.0;        // h_half: |k| in (K/2, K] contribution; grad: refinement change
    bool tail_flag = false;   // tail > 1e-4 * head
    bool used_fd = false;
};

// sum_k |k| conj(g^(k)) f^(k)
InnerProduct h_half_inner(const TestFunction& g, const TestFunction& f, int K = 512, int N = 4096);

// int_D conj(grad g) . grad f, Gauss-Legendre radial x trapezoid angular.
// Throws quadrature_failure when halving both resolutions moves the value by more than 1e-6 relative.
InnerProduct grad_inner(const TestFunction& g, const TestFunction& f, int n_radial = 256, int n_angular = 512);

// int_D f d^2z with the same tensor rule.
cplx disk_integral(const TestFunction& f, int n_radial = 256, int n_angular = 512);
cplx disk_average(const TestFunction& f);      // (1/pi) int_D f
cplx boundary_average(const TestFunction& f);  // (1/2pi) int f(e^{i theta})

struct ExpectationTerms {
    cplx bulk;      // (n/pi) int_D f
    cplx singular;  // (1/4pi) int_D (f(Re z) - f(z))/(Im z)^2
    cplx kappa4;    // -(kappa4/pi) int_D f (2|z|^2 - 1)
    cplx boundary;  // -(1/2pi) int f(e^{i theta})
    cplx arcsine;   // (1/2pi) int_{-1}^1 f(x)/sqrt(1-x^2)
    cplx endpoint;  // (f(1) + f(-1))/4
    cplx total() const { return bulk + singular + kappa4 + boundary + arcsine + endpoint; }
};

ExpectationTerms expectation_E(const TestFunction& f, double kappa4, int n);

struct CovarianceTerms {
    cplx gradient;  // (1/2pi) <grad Psym g, grad Psym f>_{L2(D)}
    cplx h_half;    // <Psym g, Psym f>_{H^1/2}
    cplx kappa4;    // kappa4 conj(<g>_D - <g>_dD) (<f>_D - <f>_dD)
    bool tail_flag = false;
    bool used_fd = false;
    cplx total() const { return gradient + h_half + kappa4; }
};

CovarianceTerms covariance_C(const TestFunction& g, const TestFunction& f, double kappa4);
double variance_V(const TestFunction& f, double kappa4);

// Complex-ensemble variance pieces:
// V1 = (1/4pi)|grad f|^2 + (1/2)|f|^2_{H^1/2},  V2 = |<f>_D - <f>_dD|^2.
double complex_V1(const TestFunction& f);
double complex_V2(const TestFunction& f);
// (1/pi) int_D |d_z f|^2
double analytic_dirichlet(const TestFunction& f);

struct PredictedMoments {
    std::string function;
    cplx E_f;
    double V_f = 0.0;
    cplx C_gf;  // C(conj f, f) = E L(f)^2
    double kappa4 = 0.0;
    int n = 0;
    ExpectationTerms e_terms;
    CovarianceTerms c_terms;

    nlohmann::json to_json() const;
};

PredictedMoments predict(const TestFunction& f, double kappa4, int n);

// Girko evaluation of sum_i f(sigma_i) from the singular values of X - z on a
// uniform z-grid over the support box of f.
struct GirkoSplit {
    double eta0 = 0.0;   // 0 -> n^{-1.1}
    double eta_c = 0.0;  // 0 -> n^{-0.9}
    double T = 1e8;
};

struct GirkoGrid {
    int intervals = 128;  // per axis; must be even
    double tolerance = -1.0;  // > 0 enables the coarse-grid check
};

struct GirkoResult {
    cplx value;
    // value = J_T - I_low - I_mid - I_top, with 2n log T removed from both J_T and I_top.
    cplx J_T, I_low, I_mid, I_top;
    double error_estimate = 0.0;  // |value - value on the every-other-node grid|
    int evaluated_points = 0;
    GirkoSplit split;
};

GirkoResult girko_evaluate(const MatrixXcd& X, const TestFunction& f, GirkoSplit split = {}, GirkoGrid grid = {});

// Density of the non-real eigenvalues of an n x n real Ginibre matrix.
double edelman_density(cplx z, int n);

void write_edelman_csv(int n, double y_min, double y_max, double x, int points, const std::string& path);

}  // namespace sclt

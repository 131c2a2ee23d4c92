#pragma once

#include <cstdint>
#include <string>

#include "sclt/common.hpp"
#include "sclt/mde.hpp"

namespace sclt {

struct Hermitization {
    cplx z;
    int n = 0;
    MatrixXcd Y;  // X - z
    MatrixXcd H;  // [[0, Y], [Y^*, 0]]
};

Hermitization hermitize(const MatrixXcd& X, cplx z);

// Spectral data of H^z in signed-index form. Positive index i (1-based) is
// stored at position i-1: lambda_{+-i} = +-lambda(i-1), w_{+-i} = (u_i, +-v_i).
struct SpectralDecomposition {
    cplx z;
    int n = 0;
    VectorXd lambda;  // lambda_1 <= ... <= lambda_n, all >= 0
    MatrixXcd U;      // columns u_i, |u_i|^2 = 1/2
    MatrixXcd V;      // columns v_i, |v_i|^2 = 1/2
    int perturbations = 0;  // degenerate-gap regularizations applied
    double residual = 0.0;  // max_i |H w_i - lambda_i w_i| / |H|

    double lambda_signed(int i) const { return i > 0 ? lambda(i - 1) : -lambda(-i - 1); }
    VectorXcd w(int i) const;  // full 2n eigenvector for signed index i
};

// Eigendecomposition of the Hermitization. Gaps below 1e-12 trigger a
// 1e-12-scaled Gaussian perturbation of X (counted in `perturbations`).
SpectralDecomposition decompose(const Hermitization& H, std::uint64_t perturb_seed = 0);

// Singular values of X - z in ascending order (values only; fast path used
// by the Monte Carlo harness and the Girko evaluator).
VectorXd singular_values(const MatrixXcd& X, cplx z);

// Theta^{z,z'}_{ij} = 4 Re[<u'_j, u_i><s_i v_i, s_j v'_j>] over |i|,|j| <= K.
struct OverlapMatrix {
    cplx z1, z2;
    int K = 0;
    MatrixXd kernel;  // positive-index block: kernel(i-1, j-1) = Theta_{ij} for i,j > 0

    double at(int i, int j) const;  // signed indices
    MatrixXd signed_matrix() const; // rows/cols ordered -K..-1, 1..K
    double max_abs() const { return kernel.cwiseAbs().maxCoeff(); }
};

OverlapMatrix overlaps(const SpectralDecomposition& d1, const SpectralDecomposition& d2, int K = -1);

// Lambda^z = Theta^{z, conj z} for real X, computed from the z decomposition alone
// (w^{conj z} = conj w^z): 4 Re[<conj u_j, u_i><v_i, conj v_j>].
OverlapMatrix lambda_overlaps(const SpectralDecomposition& d, int K = -1);

// <G^z(i eta)> = (2n)^{-1} sum_{|i|<=n} (lambda_i - i eta)^{-1}; purely imaginary.
cplx resolvent_trace(const SpectralDecomposition& d, double eta);
cplx resolvent_trace(const VectorXd& singular_vals, double eta);

struct RigidityReport {
    double max_deviation = 0.0;
    int argmax = 0;
    int window = 0;
    double threshold = 0.0;  // constant / n
    bool within = true;
};

RigidityReport rigidity_report(const SpectralDecomposition& d, const Quantiles& q, int window,
                               double threshold_constant = 20.0);
RigidityReport rigidity_report(const VectorXd& singular_vals, const Quantiles& q, int window,
                               double threshold_constant = 20.0);

void write_spectrum_csv(const SpectralDecomposition& d, const std::string& path);

}  // namespace sclt

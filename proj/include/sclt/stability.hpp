#pragma once

#include "sclt/common.hpp"
#include "sclt/mde.hpp"

namespace sclt {

// Block traces (a, d, b, c) of a 2n x 2n matrix [[a, b], [c, d]] whose
// blocks are multiples of the identity.
using TraceVector = Eigen::Vector4cd;

Eigen::Matrix2cd to_block(const TraceVector& v);
TraceVector from_block(const Eigen::Matrix2cd& B);
TraceVector identity_trace();
// Matrix adjoint: (a, d, b, c) -> (conj a, conj d, conj c, conj b).
TraceVector adjoint(const TraceVector& v);
// <X> = (a + d)/2, the normalized trace.
cplx normalized_trace(const TraceVector& v);
// <A, B> = <A^* B>; proportional to the Euclidean product in these coordinates.
cplx trace_inner(const TraceVector& A, const TraceVector& B);

struct StabilityOperator {
    enum class Kind { B_single, B_hat_pair };
    Kind kind = Kind::B_single;
    Eigen::Matrix4cd matrix;
    MdeSolution sol1, sol2;

    TraceVector apply(const TraceVector& A) const { return matrix * A; }
    TraceVector apply_adjoint(const TraceVector& A) const { return matrix.adjoint() * A; }
};

// The self-energy map S[A] = diag(<A_22>, <A_11>) in trace coordinates.
TraceVector self_energy(const TraceVector& A);

StabilityOperator build_B(const MdeSolution& sol);
StabilityOperator build_Bhat(const MdeSolution& sol1, const MdeSolution& sol2);

// Eigen-data of the single-shift operator: the eigenvector E_- = (1,-1,0,0)/sqrt2,
// the right/left pair V_r, V_l with <V_l, V_r> = 1, and their eigenvalues.
struct SingleShiftSpectrum {
    TraceVector E_minus, V_r, V_l;
    cplx eig_E_minus;  // 1 + m^2 - u^2|z|^2
    cplx eig_V;        // 1 - m^2 - u^2|z|^2
};
SingleShiftSpectrum single_shift_spectrum(const MdeSolution& sol);

struct BetaPair {
    cplx beta_hat;
    cplx beta_hat_star;
};

// 1 - tau for the eigenvalues tau of the 2x2 matrix
// R = [[z1 conj(z2) u1 u2, m1 m2], [m1 m2, conj(z1) z2 u1 u2]].
BetaPair betahat_pair(const MdeSolution& sol1, const MdeSolution& sol2);

// min(Re beta, Re beta*) / (|z1-z2|^2 + min(|w1+conj w2|, |w1-conj w2|)^2 + |Im w1| + |Im w2|).
double beta_lower_bound_ratio(const MdeSolution& sol1, const MdeSolution& sol2);

// Bhat^{-1}[M1 B M2].
TraceVector M_B(const MdeSolution& sol1, const MdeSolution& sol2, const TraceVector& B);

// A = ((B^*)^{-1}[1])^* M.
TraceVector A_vector(const MdeSolution& sol);

// U = -sqrt2 <M><M A>, and the equivalent (i/sqrt2) d_eta m^2.
cplx U_from_A(const MdeSolution& sol);
cplx U_from_derivative(const MdeSolution& sol);

// V = (1/2) d_eta1 d_eta2 log F, F = 1 + (u1 u2 |z1||z2|)^2 - m1^2 m2^2 - 2 u1 u2 Re(z1 conj z2).
cplx log_F(cplx z1, cplx z2, double eta1, double eta2);
cplx resolvent_V(cplx z1, cplx z2, double eta1, double eta2);
// V(z1, z2) + V(z1, conj z2).
cplx resolvent_Vhat(cplx z1, cplx z2, double eta1, double eta2);

// Subleading expectation correction
// -(i kappa4 / 4n) d_eta m^4 + (i / 4n) d_eta log D,  D = 1 - u^2 + 2u^3|z|^2 - u^2(z^2 + conj z^2).
cplx script_E(const MdeSolution& sol, double kappa4, int n);
cplx log_argument_D(const MdeSolution& sol);

// Two closed forms of the kappa4-free part times n (i.e. (i/4) d_eta log D):
// form A from the explicit inverse of the stability operator, form B in terms of u'.
cplx script_E_form_A(const MdeSolution& sol);
cplx script_E_form_B(const MdeSolution& sol);

// int_0^inf (i/4n) d_eta log D d eta by quadrature, and its closed form.
cplx script_E_eta_integral(cplx z, int n);
cplx script_E_eta_integral_closed(cplx z, int n);

}  // namespace sclt

#include "sclt/stability.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sclt {

namespace {
const cplx I(0.0, 1.0);
}

Eigen::Matrix2cd to_block(const TraceVector& v) {
    Eigen::Matrix2cd B;
    B << v(0), v(2), v(3), v(1);
    return B;
}

TraceVector from_block(const Eigen::Matrix2cd& B) { return TraceVector(B(0, 0), B(1, 1), B(0, 1), B(1, 0)); }

TraceVector identity_trace() { return TraceVector(1.0, 1.0, 0.0, 0.0); }

TraceVector adjoint(const TraceVector& v) {
    return TraceVector(std::conj(v(0)), std::conj(v(1)), std::conj(v(3)), std::conj(v(2)));
}

cplx normalized_trace(const TraceVector& v) { return 0.5 * (v(0) + v(1)); }

cplx trace_inner(const TraceVector& A, const TraceVector& B) { return 0.5 * A.dot(B); }

TraceVector self_energy(const TraceVector& A) { return TraceVector(A(1), A(0), 0.0, 0.0); }

StabilityOperator build_Bhat(const MdeSolution& sol1, const MdeSolution& sol2) {
    StabilityOperator op;
    op.kind = StabilityOperator::Kind::B_hat_pair;
    op.sol1 = sol1;
    op.sol2 = sol2;
    for (int k = 0; k < 4; ++k) {
        TraceVector e = TraceVector::Zero();
        e(k) = 1.0;
        const Eigen::Matrix2cd img = sol1.M * to_block(self_energy(e)) * sol2.M;
        op.matrix.col(k) = e - from_block(img);
    }
    return op;
}

StabilityOperator build_B(const MdeSolution& sol) {
    const cplx m = sol.m, u = sol.u, z = sol.z;
    const double a = std::norm(z);
    const cplx d = 1.0 - u * u * a;
    const cplx muz = m * u * z, muzb = m * u * std::conj(z);
    StabilityOperator op;
    op.kind = StabilityOperator::Kind::B_single;
    op.sol1 = sol;
    op.sol2 = sol;
    op.matrix << d, -m * m, 0.0, 0.0,
                 -m * m, d, 0.0, 0.0,
                 muz, muz, 1.0, 0.0,
                 muzb, muzb, 0.0, 1.0;
    return op;
}

SingleShiftSpectrum single_shift_spectrum(const MdeSolution& sol) {
    const cplx m = sol.m, u = sol.u, z = sol.z;
    const double a = std::norm(z);
    const cplx s = m * m + u * u * a;
    SingleShiftSpectrum r;
    r.E_minus = TraceVector(1.0, -1.0, 0.0, 0.0) / std::sqrt(2.0);
    r.V_r = TraceVector(s, s, -2.0 * m * u * z, -2.0 * m * u * std::conj(z));
    const cplx c = 1.0 / std::conj(s);
    r.V_l = TraceVector(c, c, 0.0, 0.0);
    r.eig_E_minus = 1.0 + m * m - u * u * a;
    r.eig_V = 1.0 - s;
    return r;
}

BetaPair betahat_pair(const MdeSolution& s1, const MdeSolution& s2) {
    const cplx p = s1.u * s2.u;
    const cplx q = s1.m * s2.m;
    Eigen::Matrix2cd R;
    R << s1.z * std::conj(s2.z) * p, q, q, std::conj(s1.z) * s2.z * p;
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(R, false);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "2x2 eigensolve failed");
    return {1.0 - es.eigenvalues()(0), 1.0 - es.eigenvalues()(1)};
}

double beta_lower_bound_ratio(const MdeSolution& s1, const MdeSolution& s2) {
    const BetaPair b = betahat_pair(s1, s2);
    const double num = std::min(b.beta_hat.real(), b.beta_hat_star.real());
    const double dw = std::min(std::abs(s1.w + std::conj(s2.w)), std::abs(s1.w - std::conj(s2.w)));
    const double den = std::norm(s1.z - s2.z) + dw * dw + std::abs(s1.w.imag()) + std::abs(s2.w.imag());
    return num / den;
}

TraceVector M_B(const MdeSolution& sol1, const MdeSolution& sol2, const TraceVector& B) {
    const StabilityOperator op = build_Bhat(sol1, sol2);
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(op.matrix);
    const double smin = svd.singularValues()(3);
    if (smin < 1e-10) {
        const BetaPair b = betahat_pair(sol1, sol2);
        throw Error(ErrorCode::singular_operator,
                    "stability operator numerically singular (min singular value " + std::to_string(smin) +
                        ", beta = " + std::to_string(b.beta_hat.real()) + "," +
                        std::to_string(b.beta_hat_star.real()) + ")");
    }
    const TraceVector rhs = from_block(sol1.M * to_block(B) * sol2.M);
    return op.matrix.fullPivLu().solve(rhs);
}

TraceVector A_vector(const MdeSolution& sol) {
    const StabilityOperator op = build_B(sol);
    const Eigen::Matrix4cd Bs = op.matrix.adjoint();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(Bs);
    require(svd.singularValues()(3) >= 1e-12, ErrorCode::singular_operator,
            "adjoint stability operator numerically singular");
    const TraceVector Y = Bs.fullPivLu().solve(identity_trace());
    return from_block(to_block(adjoint(Y)) * sol.M);
}

cplx U_from_A(const MdeSolution& sol) {
    const TraceVector A = A_vector(sol);
    const TraceVector Mv = from_block(sol.M);
    const TraceVector MA = from_block(sol.M * to_block(A));
    return -std::sqrt(2.0) * normalized_trace(Mv) * normalized_trace(MA);
}

cplx U_from_derivative(const MdeSolution& sol) {
    const EtaDerivatives d = m_eta_derivatives(sol);
    return I / std::sqrt(2.0) * 2.0 * sol.m * d.dm;
}

namespace {

struct FParts {
    cplx F, F1, F2, F12;
};

FParts F_parts(cplx z1, cplx z2, double eta1, double eta2) {
    const MdeSolution s1 = solve_m(z1, cplx(0.0, eta1));
    const MdeSolution s2 = solve_m(z2, cplx(0.0, eta2));
    const EtaDerivatives d1 = m_eta_derivatives(s1);
    const EtaDerivatives d2 = m_eta_derivatives(s2);
    const double zz = std::norm(z1) * std::norm(z2);
    const double r = (z1 * std::conj(z2)).real();
    const cplx p = s1.u * s2.u, q = s1.m * s2.m;
    const cplx p1 = d1.du * s2.u, p2 = s1.u * d2.du, p12 = d1.du * d2.du;
    const cplx q1 = d1.dm * s2.m, q2 = s1.m * d2.dm, q12 = d1.dm * d2.dm;
    FParts f;
    f.F = 1.0 + p * p * zz - q * q - 2.0 * p * r;
    f.F1 = 2.0 * p * p1 * zz - 2.0 * q * q1 - 2.0 * r * p1;
    f.F2 = 2.0 * p * p2 * zz - 2.0 * q * q2 - 2.0 * r * p2;
    f.F12 = 2.0 * p2 * p1 * zz + 2.0 * p * p12 * zz - 2.0 * q2 * q1 - 2.0 * q * q12 - 2.0 * r * p12;
    return f;
}

}  // namespace

cplx log_F(cplx z1, cplx z2, double eta1, double eta2) {
    const MdeSolution s1 = solve_m(z1, cplx(0.0, eta1));
    const MdeSolution s2 = solve_m(z2, cplx(0.0, eta2));
    const double zz = std::norm(z1) * std::norm(z2);
    const double r = (z1 * std::conj(z2)).real();
    const cplx p = s1.u * s2.u, q = s1.m * s2.m;
    return std::log(1.0 + p * p * zz - q * q - 2.0 * p * r);
}

cplx resolvent_V(cplx z1, cplx z2, double eta1, double eta2) {
    require(eta1 > 0.0 && eta2 > 0.0, ErrorCode::invalid_argument, "resolvent_V needs positive eta");
    const FParts f = F_parts(z1, z2, eta1, eta2);
    require(std::abs(f.F) > 1e-14, ErrorCode::singular_operator, "F numerically zero in resolvent_V");
    return 0.5 * (f.F12 / f.F - f.F1 * f.F2 / (f.F * f.F));
}

cplx resolvent_Vhat(cplx z1, cplx z2, double eta1, double eta2) {
    return resolvent_V(z1, z2, eta1, eta2) + resolvent_V(z1, std::conj(z2), eta1, eta2);
}

cplx log_argument_D(const MdeSolution& sol) {
    const cplx u = sol.u, z = sol.z;
    const double a = std::norm(z);
    return 1.0 - u * u + 2.0 * u * u * u * a - u * u * (z * z + std::conj(z * z));
}

namespace {

// d_eta D
cplx log_argument_D_prime(const MdeSolution& sol, const EtaDerivatives& d) {
    const cplx u = sol.u, z = sol.z;
    const double a = std::norm(z);
    return d.du * (-2.0 * u + 6.0 * u * u * a - 2.0 * u * (z * z + std::conj(z * z)));
}

}  // namespace

cplx script_E(const MdeSolution& sol, double kappa4, int n) {
    require(n > 0, ErrorCode::invalid_argument, "n must be positive");
    const EtaDerivatives d = m_eta_derivatives(sol);
    const cplx D = log_argument_D(sol);
    require(std::abs(D) > 1e-300, ErrorCode::singular_operator, "log argument numerically zero");
    const cplx m = sol.m;
    const double nn = n;
    return -I * kappa4 / (4.0 * nn) * 4.0 * m * m * m * d.dm + I / (4.0 * nn) * log_argument_D_prime(sol, d) / D;
}

cplx script_E_form_A(const MdeSolution& sol) {
    const cplx m = sol.m, u = sol.u;
    const double a = std::norm(sol.z);
    const double x = sol.z.real(), y = sol.z.imag();
    const double h = x * x - y * y;
    const cplx m2 = m * m, u2 = u * u;
    const cplx num = m2 * m2 + m2 * u2 * a - 2.0 * u2 * u2 * a * a + 2.0 * u2 * h;
    const cplx den = (1.0 - m2 - u2 * a) * (1.0 + u2 * u2 * a * a - m2 * m2 - 2.0 * u2 * h);
    return m * num / den;
}

cplx script_E_form_B(const MdeSolution& sol) {
    const EtaDerivatives d = m_eta_derivatives(sol);
    const cplx u = sol.u;
    const double a = std::norm(sol.z);
    const double x = sol.z.real(), y = sol.z.imag();
    const double h = x * x - y * y;
    const cplx num = u - 3.0 * a * u * u + 2.0 * u * h;
    const cplx den = 1.0 - u * u + 2.0 * u * u * u * a - 2.0 * u * u * h;
    return -I * d.du / 2.0 * num / den;
}

cplx script_E_eta_integral(cplx z, int n) {
    auto f = [&](double eta) {
        if (eta <= 0.0) eta = std::numeric_limits<double>::min();
        const MdeSolution s = solve_m(z, cplx(0.0, eta));
        const EtaDerivatives d = m_eta_derivatives(s);
        return (log_argument_D_prime(s, d) / log_argument_D(s)).real();
    };
    double err = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, inf, 15, 1e-12, &err);
    return I / (4.0 * n) * v;
}

cplx script_E_eta_integral_closed(cplx z, int n) {
    const double x = z.real(), y = z.imag();
    const double a = x * x + y * y;
    double val;
    if (a <= 1.0)
        val = std::log(4.0) + 2.0 * std::log(std::abs(y));
    else
        val = std::log(std::abs(a * a + 1.0 - 2.0 * (x * x - y * y))) - std::log(a * a);
    return -I / (4.0 * n) * val;
}

}  // namespace sclt

#include "sclt/spectral.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "sclt/ensemble.hpp"
#include "sclt/rng.hpp"

namespace sclt {

Hermitization hermitize(const MatrixXcd& X, cplx z) {
    require(X.rows() == X.cols(), ErrorCode::dimension_mismatch, "hermitize needs a square matrix");
    Hermitization h;
    h.z = z;
    h.n = static_cast<int>(X.rows());
    h.Y = X;
    h.Y.diagonal().array() -= z;
    const int n = h.n;
    h.H = MatrixXcd::Zero(2 * n, 2 * n);
    h.H.topRightCorner(n, n) = h.Y;
    h.H.bottomLeftCorner(n, n) = h.Y.adjoint();
    return h;
}

VectorXcd SpectralDecomposition::w(int i) const {
    require(i != 0 && std::abs(i) <= n, ErrorCode::invalid_argument, "eigenvector index out of range");
    const int k = std::abs(i) - 1;
    VectorXcd out(2 * n);
    out.head(n) = U.col(k);
    out.tail(n) = (i > 0 ? 1.0 : -1.0) * V.col(k);
    return out;
}

namespace {

bool has_small_gap(const VectorXd& ev, int n) {
    if (2.0 * ev(n) < 1e-12) return true;
    for (int k = n; k + 1 < 2 * n; ++k)
        if (ev(k + 1) - ev(k) < 1e-12) return true;
    return false;
}

}  // namespace

SpectralDecomposition decompose(const Hermitization& h, std::uint64_t perturb_seed) {
    const int n = h.n;
    SpectralDecomposition d;
    d.z = h.z;
    d.n = n;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h.H);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "Hermitian eigensolver did not converge");
    if (has_small_gap(es.eigenvalues(), n)) {
        Philox rng(perturb_seed, 0, stream_tag::perturb);
        const double scale = 1e-12 * std::max(1.0, h.Y.norm() / std::sqrt(static_cast<double>(n)));
        MatrixXcd Hp = h.H;
        const MatrixXcd Q = scale * standard_gaussian(n, Symmetry::complex, rng);
        Hp.topRightCorner(n, n) += Q;
        Hp.bottomLeftCorner(n, n) += Q.adjoint();
        es.compute(Hp);
        require(es.info() == Eigen::Success, ErrorCode::numerical_failure,
                "Hermitian eigensolver did not converge after perturbation");
        d.perturbations = 1;
    }

    d.lambda = es.eigenvalues().tail(n);
    d.U.resize(n, n);
    d.V.resize(n, n);
    const double half = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < n; ++k) {
        const auto col = es.eigenvectors().col(n + k);
        VectorXcd u = col.head(n), v = col.tail(n);
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        const cplx ph = std::abs(u(imax)) > 0 ? std::conj(u(imax)) / std::abs(u(imax)) : cplx(1.0);
        u *= ph;
        v *= ph;
        u(imax) = cplx(u(imax).real(), 0.0);
        const double nu = u.norm(), nv = v.norm();
        if (nu > 0) u *= half / nu;
        if (nv > 0) v *= half / nv;
        d.U.col(k) = u;
        d.V.col(k) = v;
    }
    if (d.lambda(0) < 0.0) d.lambda(0) = 0.0;

    const double hnorm = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(2 * n - 1)));
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        const VectorXcd r1 = h.Y * d.V.col(k) - d.lambda(k) * d.U.col(k);
        const VectorXcd r2 = h.Y.adjoint() * d.U.col(k) - d.lambda(k) * d.V.col(k);
        worst = std::max(worst, std::sqrt(r1.squaredNorm() + r2.squaredNorm()));
    }
    d.residual = hnorm > 0 ? worst / hnorm : worst;
    require(d.residual <= 1e-8, ErrorCode::numerical_failure,
            "eigen-residual " + std::to_string(d.residual) + " exceeds 1e-8 |H|");
    return d;
}

VectorXd singular_values(const MatrixXcd& X, cplx z) {
    MatrixXcd Y = X;
    Y.diagonal().array() -= z;
    const MatrixXcd G = Y.adjoint() * Y;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "singular value solve did not converge");
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

double OverlapMatrix::at(int i, int j) const {
    require(i != 0 && j != 0 && std::abs(i) <= K && std::abs(j) <= K, ErrorCode::invalid_argument,
            "overlap index outside the computed window");
    const double s = ((i > 0) == (j > 0)) ? 1.0 : -1.0;
    return s * kernel(std::abs(i) - 1, std::abs(j) - 1);
}

MatrixXd OverlapMatrix::signed_matrix() const {
    MatrixXd T(2 * K, 2 * K);
    auto idx = [&](int r) { return r < K ? r - K : r - K + 1; };
    for (int r = 0; r < 2 * K; ++r)
        for (int c = 0; c < 2 * K; ++c) T(r, c) = at(idx(r), idx(c));
    return T;
}

OverlapMatrix overlaps(const SpectralDecomposition& d1, const SpectralDecomposition& d2, int K) {
    require(d1.n == d2.n, ErrorCode::dimension_mismatch, "overlaps need decompositions of equal size");
    if (K < 0) K = d1.n;
    require(K <= d1.n, ErrorCode::invalid_argument, "overlap window exceeds n");
    OverlapMatrix o;
    o.z1 = d1.z;
    o.z2 = d2.z;
    o.K = K;
    const MatrixXcd Gu = d2.U.leftCols(K).adjoint() * d1.U.leftCols(K);  // Gu(j,i) = <u'_j, u_i>
    const MatrixXcd Gv = d1.V.leftCols(K).adjoint() * d2.V.leftCols(K);  // Gv(i,j) = <v_i, v'_j>
    o.kernel = 4.0 * (Gu.transpose().array() * Gv.array()).real().matrix();
    return o;
}

OverlapMatrix lambda_overlaps(const SpectralDecomposition& d, int K) {
    if (K < 0) K = d.n;
    require(K <= d.n, ErrorCode::invalid_argument, "overlap window exceeds n");
    OverlapMatrix o;
    o.z1 = d.z;
    o.z2 = std::conj(d.z);
    o.K = K;
    const MatrixXcd Gu = d.U.leftCols(K).transpose() * d.U.leftCols(K);
    const MatrixXcd Gv = d.V.leftCols(K).transpose() * d.V.leftCols(K);
    o.kernel = 4.0 * (Gu.array() * Gv.array().conjugate()).real().matrix();
    return o;
}

cplx resolvent_trace(const VectorXd& s, double eta) {
    require(eta > 0.0, ErrorCode::invalid_argument, "resolvent_trace needs eta > 0");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) acc += eta / (s(k) * s(k) + eta * eta);
    return cplx(0.0, acc / static_cast<double>(s.size()));
}

cplx resolvent_trace(const SpectralDecomposition& d, double eta) { return resolvent_trace(d.lambda, eta); }

RigidityReport rigidity_report(const VectorXd& s, const Quantiles& q, int window, double c) {
    const int n = static_cast<int>(s.size());
    require(window >= 1 && window <= n && window <= static_cast<int>(q.gamma_pos.size()),
            ErrorCode::invalid_argument, "rigidity window exceeds n");
    RigidityReport r;
    r.window = window;
    r.threshold = c / n;
    for (int i = 1; i <= window; ++i) {
        const double dev = std::abs(s(i - 1) - q.gamma(i));
        if (dev > r.max_deviation) {
            r.max_deviation = dev;
            r.argmax = i;
        }
    }
    r.within = r.max_deviation <= r.threshold;
    return r;
}

RigidityReport rigidity_report(const SpectralDecomposition& d, const Quantiles& q, int window, double c) {
    return rigidity_report(d.lambda, q, window, c);
}

void write_spectrum_csv(const SpectralDecomposition& d, const std::string& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot open " + path);
    out.precision(17);
    out << "index,lambda\r\n";
    for (int i = -d.n; i <= d.n; ++i)
        if (i != 0) out << i << ',' << d.lambda_signed(i) << "\r\n";
}

}  // namespace sclt

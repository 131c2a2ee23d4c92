#include "sclt/dbm.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace sclt {

std::string dbm_kind_name(DbmKind k) {
    switch (k) {
        case DbmKind::raw: return "raw";
        case DbmKind::regularized: return "regularized";
        case DbmKind::interpolated: return "interpolated";
        case DbmKind::ginibre: return "ginibre";
    }
    return "unknown";
}

VectorXd DbmState::signed_particles() const {
    const int m = n();
    VectorXd s(2 * m);
    for (int r = 0; r < m; ++r) s(r) = -x(m - 1 - r);
    s.tail(m) = x;
    return s;
}

bool DbmState::ordered(double min_gap) const {
    const int m = n();
    if (m == 0) return true;
    if (!(2.0 * x(0) >= min_gap)) return false;
    for (int i = 0; i + 1 < m; ++i)
        if (!(x(i + 1) - x(i) >= min_gap)) return false;
    return x.allFinite();
}

DbmState make_state(const VectorXd& positive_particles, DbmKind kind, double alpha, double t) {
    DbmState s;
    s.x = positive_particles;
    s.kind = kind;
    s.alpha = alpha;
    s.t = t;
    require(s.ordered(0.0), ErrorCode::invalid_argument, "initial particles must be positive and increasing");
    return s;
}

MatrixXd CorrelationModel::signed_lambda() const {
    const int m = n();
    MatrixXd L(2 * m, 2 * m);
    auto mag = [m](int r) { return r < m ? m - 1 - r : r - m; };
    auto sgn = [m](int r) { return r < m ? -1.0 : 1.0; };
    for (int r = 0; r < 2 * m; ++r)
        for (int c = 0; c < 2 * m; ++c) L(r, c) = sgn(r) * sgn(c) * K(mag(r), mag(c));
    return L;
}

CorrelationModel CorrelationModel::zero(int n, double threshold) {
    return from_kernel(MatrixXd::Zero(n, n), threshold);
}

CorrelationModel CorrelationModel::from_kernel(const MatrixXd& K, double threshold) {
    require(K.rows() == K.cols(), ErrorCode::dimension_mismatch, "overlap kernel must be square");
    CorrelationModel m;
    m.K = K;
    m.cutoff_threshold = threshold;
    m.A = K.size() ? K.cwiseAbs().maxCoeff() : 0.0;
    m.cutoff_active = m.A <= threshold;
    return m;
}

CorrelationModel CorrelationModel::from_overlaps(const OverlapMatrix& lambda, double threshold) {
    return from_kernel(lambda.kernel, threshold);
}

CorrelationModel CorrelationModel::interpolate(const CorrelationModel& a, const CorrelationModel& b, double theta) {
    require(a.n() == b.n(), ErrorCode::dimension_mismatch, "checkpoint models differ in size");
    return from_kernel((1.0 - theta) * a.K + theta * b.K, a.cutoff_threshold);
}

VectorXd drift_explicit(const VectorXd& x, const MatrixXd& K, double weight) {
    const int n = static_cast<int>(x.size());
    require(K.rows() == n && K.cols() == n, ErrorCode::dimension_mismatch, "overlap kernel does not match particles");
    VectorXd d(n);
    const double inv2n = 1.0 / (2.0 * n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double k = weight * K(i, j);
            acc += (1.0 + k) / (x(i) - x(j)) + (1.0 - k) / (x(i) + x(j));
        }
        d(i) = inv2n * acc + (1.0 - weight * K(i, i)) / (4.0 * n * x(i));
    }
    return d;
}

VectorXd drift_signed(const VectorXd& sx, const MatrixXd& L, double weight) {
    const int m = static_cast<int>(sx.size());
    require(m % 2 == 0 && L.rows() == m && L.cols() == m, ErrorCode::dimension_mismatch,
            "signed drift needs 2n particles and a 2n x 2n overlap matrix");
    const double inv2n = 1.0 / m;
    VectorXd d(m);
    for (int r = 0; r < m; ++r) {
        double acc = 0.0;
        for (int c = 0; c < m; ++c)
            if (c != r) acc += (1.0 + weight * L(r, c)) / (sx(r) - sx(c));
        d(r) = inv2n * acc;
    }
    return d;
}

MatrixXd psd_sqrt(const MatrixXd& C, NoiseReport* report) {
    const MatrixXd Cs = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Cs);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "covariance eigensolve failed");
    VectorXd ev = es.eigenvalues();
    NoiseReport r;
    r.min_eigenvalue = ev.size() ? ev.minCoeff() : 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < 0.0) {
            r.max_adjustment = std::max(r.max_adjustment, -ev(k));
            ev(k) = 0.0;
        }
    }
    r.inconsistent = r.max_adjustment > 1e-6;
    if (report) *report = r;
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd psd_inv_sqrt(const MatrixXd& C, double tol) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (C + C.transpose()));
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "covariance eigensolve failed");
    VectorXd ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) ev(k) = ev(k) > tol ? 1.0 / std::sqrt(ev(k)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd noise_covariance(const CorrelationModel& model, DbmKind kind) {
    const int n = model.n();
    switch (kind) {
        case DbmKind::raw: return 0.5 * (MatrixXd::Identity(n, n) + model.K);
        case DbmKind::regularized:
        case DbmKind::interpolated: return 0.5 * (MatrixXd::Identity(n, n) + model.K_cut());
        case DbmKind::ginibre: return MatrixXd::Identity(n, n);
    }
    return MatrixXd::Identity(n, n);
}

NoiseBlock make_noise(const MatrixXd& covariance, double dt, Philox& rng) {
    require(dt > 0.0, ErrorCode::invalid_argument, "noise needs dt > 0");
    NoiseBlock b;
    b.dt = dt;
    b.mode = NoiseMode::from_overlaps;
    b.S = psd_sqrt(covariance, &b.report);
    VectorXd xi(covariance.rows());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
    b.db = std::sqrt(dt) * (b.S * xi);
    return b;
}

NoiseBlock make_noise(const CorrelationModel& model, DbmKind kind, double dt, Philox& rng) {
    NoiseBlock b = make_noise(noise_covariance(model, kind), dt, rng);
    b.mode = kind == DbmKind::ginibre ? NoiseMode::independent : NoiseMode::from_overlaps;
    return b;
}

StepCoefficients step_coefficients(DbmKind kind, double alpha, int n, const DbmExponents& ex) {
    StepCoefficients c;
    const double reg = 1.0 / std::sqrt(n * (1.0 + std::pow(static_cast<double>(n), -ex.omega_r)));
    switch (kind) {
        case DbmKind::raw:
            c.lambda_weight = 1.0;
            c.noise_scale = 1.0 / std::sqrt(static_cast<double>(n));
            break;
        case DbmKind::regularized:
            c.lambda_weight = 0.0;
            c.noise_scale = reg;
            break;
        case DbmKind::interpolated:
            c.lambda_weight = alpha;
            c.noise_scale = reg;
            break;
        case DbmKind::ginibre:
            c.lambda_weight = 0.0;
            c.noise_scale = 1.0 / std::sqrt(2.0 * n);
            break;
    }
    return c;
}

namespace {

struct Stepper {
    const CorrelationModel& model;
    const MatrixXd& S;
    Philox& rng;
    const StepOptions& opt;
    StepCoefficients coef;
    const MatrixXd& Kdrift;
    StepStats stats;

    DbmState attempt(const DbmState& s, double dt, const VectorXd& db, int depth) {
        DbmState next = s;
        next.x = s.x + dt * drift_explicit(s.x, Kdrift, coef.lambda_weight) + coef.noise_scale * db;
        next.t = s.t + dt;
        if (next.ordered(opt.min_gap)) {
            ++stats.substeps;
            stats.halvings = std::max(stats.halvings, depth);
            return next;
        }
        if (depth >= opt.max_halvings) {
            std::ostringstream msg;
            msg << "ordering could not be restored after " << opt.max_halvings << " halvings at t=" << s.t
                << "; x[0..min(n,4)) =";
            for (int i = 0; i < std::min(4, s.n()); ++i) msg << ' ' << s.x(i);
            throw Error(ErrorCode::retry_exhausted, msg.str());
        }
        // Brownian bridge midpoint: W(dt/2) | W(dt) = db ~ N(db/2, S S^T dt/4)
        VectorXd xi(db.size());
        for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
        const VectorXd db1 = 0.5 * db + 0.5 * std::sqrt(dt) * (S * xi);
        const VectorXd db2 = db - db1;
        const DbmState mid = attempt(s, 0.5 * dt, db1, depth + 1);
        return attempt(mid, 0.5 * dt, db2, depth + 1);
    }
};

}  // namespace

DbmState step(const DbmState& s, const CorrelationModel& model, double dt, const NoiseBlock& noise, Philox& bridge_rng,
              const StepOptions& opt, StepStats* stats) {
    require(dt > 0.0, ErrorCode::invalid_argument, "step needs dt > 0");
    require(model.n() == s.n() && noise.db.size() == s.n(), ErrorCode::dimension_mismatch,
            "model/noise size does not match the state");
    require(s.ordered(0.0), ErrorCode::invalid_argument, "step needs an ordered state");
    const MatrixXd Kdrift = s.kind == DbmKind::raw ? model.K : model.K_cut();
    MatrixXd S = noise.S;
    if (S.rows() != s.n()) S = psd_sqrt(noise_covariance(model, s.kind));
    Stepper st{model, S, bridge_rng, opt, step_coefficients(s.kind, s.alpha, s.n(), opt.exponents), Kdrift, {}};
    DbmState out = st.attempt(s, dt, noise.db, 0);
    if (stats) *stats = st.stats;
    return out;
}

VectorXd project_increment(const SpectralDecomposition& d, const MatrixXcd& dB) {
    const MatrixXcd P = d.U.adjoint() * dB * d.V;
    return 2.0 * P.diagonal().real();
}

MatrixFlowTrajectory matrix_flow_trajectory(const MatrixSample& X0, cplx z, double t_final, double dt,
                                            std::uint64_t shared_seed, bool decompose_every_step) {
    require(t_final >= 0.0 && dt > 0.0, ErrorCode::invalid_argument, "matrix flow needs t_final >= 0 and dt > 0");
    const int n = static_cast<int>(X0.data.rows());
    const long steps = std::lround(t_final / dt);
    require(std::abs(steps * dt - t_final) <= 1e-9 * std::max(1.0, t_final), ErrorCode::invalid_argument,
            "t_final must be an integer multiple of dt");
    MatrixFlowTrajectory tr;
    tr.z = z;
    tr.dt = dt;
    FlowState st = start_flow(X0);
    st.base_seed = shared_seed;
    const std::uint64_t pseed = splitmix64(shared_seed ^ 0x70657274ULL);
    tr.times.push_back(0.0);
    tr.decompositions.push_back(decompose(hermitize(st.X, z), pseed));
    for (long k = 0; k < steps; ++k) {
        Philox rng(st.base_seed, static_cast<std::uint64_t>(st.trial), static_cast<std::uint64_t>(st.step_count + 1));
        const MatrixXcd G = standard_gaussian(n, st.symmetry, rng);
        const MatrixXcd dB = std::sqrt(dt) * G;
        if (decompose_every_step || k == 0) tr.projected_noise.push_back(project_increment(tr.decompositions.back(), dB));
        tr.increments.push_back(dB);
        st = brownian_step(st, dt, &G);
        st.t = (k + 1) * dt;
        if (decompose_every_step || k + 1 == steps) {
            tr.times.push_back(st.t);
            tr.decompositions.push_back(decompose(hermitize(st.X, z), pseed + static_cast<std::uint64_t>(k + 1)));
        }
    }
    tr.final_matrix = st.X;
    return tr;
}

DbmState sde_from_matrix_flow(const MatrixFlowTrajectory& traj, int stride, const StepOptions& opt) {
    const int steps = static_cast<int>(traj.increments.size());
    require(stride >= 1 && steps % stride == 0, ErrorCode::invalid_argument, "stride must divide the step count");
    require(static_cast<int>(traj.decompositions.size()) == steps + 1, ErrorCode::invalid_argument,
            "trajectory must be decomposed at every step");
    DbmState s = make_state(traj.decompositions.front().lambda, DbmKind::raw);
    for (int k = 0; k < steps; k += stride) {
        const SpectralDecomposition& d = traj.decompositions[k];
        MatrixXcd dB = traj.increments[k];
        for (int q = 1; q < stride; ++q) dB += traj.increments[k + q];
        const CorrelationModel model = CorrelationModel::from_overlaps(lambda_overlaps(d), 1.0);
        NoiseBlock nb;
        nb.dt = stride * traj.dt;
        nb.mode = NoiseMode::shared_matrix_projection;
        nb.db = project_increment(d, dB);
        nb.S = psd_sqrt(noise_covariance(model, DbmKind::raw), &nb.report);
        Philox bridge(0x62726964ULL, static_cast<std::uint64_t>(k), stream_tag::dbm);
        s = step(s, model, nb.dt, nb, bridge, opt);
    }
    return s;
}

double coupling_distance(const DbmState& a, const DbmState& b, int K, double scale_a, double scale_b) {
    require(K >= 1 && K <= a.n() && K <= b.n(), ErrorCode::invalid_argument, "coupling window exceeds a state");
    double d = 0.0;
    for (int i = 0; i < K; ++i) d = std::max(d, std::abs(scale_a * a.x(i) - scale_b * b.x(i)));
    return d;
}

void write_checkpoint(std::ostream& out, const DbmState& s, int window) {
    const int w = std::min(window, s.n());
    nlohmann::json j;
    j["t"] = s.t;
    j["kind"] = dbm_kind_name(s.kind);
    if (s.kind == DbmKind::interpolated) j["alpha"] = s.alpha;
    std::vector<double> p(s.x.data(), s.x.data() + w);
    j["particles"] = p;
    out << j.dump() << '\n';
}

}  // namespace sclt

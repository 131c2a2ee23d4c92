#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sclt/common.hpp"
#include "sclt/ensemble.hpp"
#include "sclt/rng.hpp"
#include "sclt/spectral.hpp"

namespace sclt {

enum class DbmKind { raw, regularized, interpolated, ginibre };

std::string dbm_kind_name(DbmKind k);

// Particles x_1 < ... < x_n on the positive axis; x_{-i} = -x_i is implicit,
// so antisymmetry holds by construction.
struct DbmState {
    VectorXd x;
    double t = 0.0;
    DbmKind kind = DbmKind::raw;
    double alpha = 0.0;  // interpolation parameter, kind == interpolated only

    int n() const { return static_cast<int>(x.size()); }
    double at(int i) const { return i > 0 ? x(i - 1) : -x(-i - 1); }
    VectorXd signed_particles() const;  // ordered -n..-1, 1..n
    bool ordered(double min_gap = 1e-14) const;
};

DbmState make_state(const VectorXd& positive_particles, DbmKind kind, double alpha = 0.0, double t = 0.0);

struct DbmExponents {
    double omega_E = 0.2;
    double omega_r = 0.05;
    double omega_f = 0.2;
};

// Overlap data entering the drift and the noise covariance. K holds the
// positive-index block of Lambda; Lambda_{ij} = s_i s_j K_{|i||j|}.
struct CorrelationModel {
    MatrixXd K;
    double cutoff_threshold = 1.0;  // n^{-omega_E}
    double A = 0.0;                 // max |Lambda_ij|
    bool cutoff_active = true;      // indicator(A <= threshold): cut-off overlaps equal the raw ones

    int n() const { return static_cast<int>(K.rows()); }
    MatrixXd K_cut() const { return cutoff_active ? K : MatrixXd::Zero(K.rows(), K.cols()); }
    MatrixXd signed_lambda() const;  // rows/cols ordered -n..-1, 1..n

    static CorrelationModel zero(int n, double threshold = 1.0);
    static CorrelationModel from_kernel(const MatrixXd& K, double threshold);
    static CorrelationModel from_overlaps(const OverlapMatrix& lambda, double threshold);
    // Linear interpolation between two checkpoints; the cutoff is re-evaluated.
    static CorrelationModel interpolate(const CorrelationModel& a, const CorrelationModel& b, double theta);
};

// Drift of positive particles, written with the explicit overlap coefficients:
// (1/2n) sum_{j != i} [(1 + wK_ij)/(x_i - x_j) + (1 - wK_ij)/(x_i + x_j)] + (1 - wK_ii)/(4n x_i).
VectorXd drift_explicit(const VectorXd& x, const MatrixXd& K, double weight);
// Same drift from the signed-index sum (1/2n) sum_{j != i, |j| <= n} (1 + w Lambda_ij)/(x_i - x_j),
// returned for all 2n signed particles (ordered -n..-1, 1..n).
VectorXd drift_signed(const VectorXd& signed_x, const MatrixXd& signed_lambda, double weight);

struct NoiseReport {
    double min_eigenvalue = 0.0;   // of the target covariance before projection
    double max_adjustment = 0.0;   // largest eigenvalue change made by the PSD projection
    bool inconsistent = false;     // max_adjustment > 1e-6
};

// Symmetric PSD square root with negative eigenvalues clipped.
MatrixXd psd_sqrt(const MatrixXd& C, NoiseReport* report = nullptr);
// Moore-Penrose inverse square root (eigenvalues below tol dropped).
MatrixXd psd_inv_sqrt(const MatrixXd& C, double tol = 1e-12);

enum class NoiseMode { from_overlaps, independent, shared_matrix_projection };

struct NoiseBlock {
    VectorXd db;   // increments for positive indices; db_{-i} = -db_i
    MatrixXd S;    // covariance square root per unit time, used for Brownian-bridge refinement
    double dt = 0.0;
    NoiseMode mode = NoiseMode::independent;
    NoiseReport report;
};

// Noise covariance per unit time for a kind: (I + K)/2 (raw), (I + K_cut)/2
// (regularized/interpolated), I (ginibre).
MatrixXd noise_covariance(const CorrelationModel& model, DbmKind kind);

// sqrt(dt) C^{1/2} xi
NoiseBlock make_noise(const CorrelationModel& model, DbmKind kind, double dt, Philox& rng);
NoiseBlock make_noise(const MatrixXd& covariance, double dt, Philox& rng);

struct StepOptions {
    DbmExponents exponents;
    int max_halvings = 40;
    double min_gap = 1e-14;
};

struct StepStats {
    int halvings = 0;  // deepest refinement used
    int substeps = 0;
};

// Euler-Maruyama step. On an ordering violation dt is halved and the
// driving path refined by a Brownian bridge drawn from bridge_rng.
DbmState step(const DbmState& s, const CorrelationModel& model, double dt, const NoiseBlock& noise, Philox& bridge_rng,
              const StepOptions& opt = {}, StepStats* stats = nullptr);

// Scales applied to drift/noise for a kind at dimension n.
struct StepCoefficients {
    double lambda_weight = 0.0;
    double noise_scale = 0.0;
};
StepCoefficients step_coefficients(DbmKind kind, double alpha, int n, const DbmExponents& ex);

// Matrix flow X_{t+dt} = X_t + sqrt(dt/n) G, re-decomposed after every step.
struct MatrixFlowTrajectory {
    cplx z;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<SpectralDecomposition> decompositions;  // at each time
    std::vector<MatrixXcd> increments;                  // B(t_{k+1}) - B(t_k) = sqrt(dt) G_k
    std::vector<VectorXd> projected_noise;              // db_k,i = 2 Re <u_i(t_k), dB_k v_i(t_k)>
    MatrixXcd final_matrix;
};

MatrixFlowTrajectory matrix_flow_trajectory(const MatrixSample& X0, cplx z, double t_final, double dt,
                                            std::uint64_t shared_seed, bool decompose_every_step = true);

// db_i = 2 Re <u_i, dB v_i>
VectorXd project_increment(const SpectralDecomposition& d, const MatrixXcd& dB);

// Raw-kind SDE driven by the matrix-flow noise, with stride fine steps per SDE step.
DbmState sde_from_matrix_flow(const MatrixFlowTrajectory& traj, int stride, const StepOptions& opt = {});

// max_{1<=i<=K} |scale_a a_i - scale_b b_i|
double coupling_distance(const DbmState& a, const DbmState& b, int K, double scale_a = 1.0, double scale_b = 1.0);

// JSON-lines checkpoint {t, kind, particles[window]}
void write_checkpoint(std::ostream& out, const DbmState& s, int window);

}  // namespace sclt

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sclt/cltpred.hpp"
#include "sclt/common.hpp"
#include "sclt/dbm.hpp"
#include "sclt/ensemble.hpp"
#include "sclt/stats.hpp"

namespace sclt {

// Worker count: explicit value if > 0, else SPECTRA_CLT_THREADS, else hardware concurrency.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, count) on a pool; fn must only touch slot i of its outputs.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

// Eigenvalues of a general square matrix (LAPACK dgeev for real input, zgeev otherwise).
VectorXcd nonhermitian_eigenvalues(const MatrixSample& X);
VectorXcd nonhermitian_eigenvalues(const MatrixXd& X);
VectorXcd nonhermitian_eigenvalues(const MatrixXcd& X);

enum class Experiment { clt, universality, independence, dbm_coupling, girko_check, edelman, overlaps };
std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& s);

struct Exponents {
    double omega_E = 0.2;
    double omega_r = 0.05;
    double omega_f = 0.2;
    double delta_0 = 0.1;
    double delta_1 = 0.1;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::clt;
    EnsembleSpec spec;
    int trials = 100;
    std::vector<std::string> test_functions;
    std::vector<cplx> z_points;
    std::vector<double> eta_grid;
    Exponents exponents;
    std::string output_path;
    int threads = 0;
    nlohmann::json extra = nlohmann::json::object();  // experiment-specific knobs

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    // Throws config_error when experiment hypotheses are violated.
    void validate() const;

    double extra_double(const std::string& key, double fallback) const;
    int extra_int(const std::string& key, int fallback) const;
};

ExperimentConfig load_config(const std::string& path);

struct TrialResult {
    std::int64_t trial_index = 0;
    std::vector<cplx> linear_statistics;  // sum_i f(sigma_i), one per test function
    std::vector<cplx> resolvent_traces;   // <G^z(i eta)> per (z, eta)
    std::vector<double> smallest_singular_values;  // per z
    double runtime = 0.0;
    bool failed = false;
    std::string error;

    nlohmann::json to_json() const;
    static TrialResult from_json(const nlohmann::json& j);
    bool operator==(const TrialResult& o) const;
};

struct FunctionSummary {
    std::string name;
    Estimate mean_re, mean_im;
    Estimate variance;  // E|L - EL|^2
    cplx predicted_mean;
    double predicted_variance = 0.0;
    double z_mean = 0.0;      // real part
    double z_variance = 0.0;
    std::optional<NormalityResult> normal_re, normal_im;
    double batch_over_naive_se = 0.0;  // trial-independence diagnostic
    PredictedMoments prediction;
};

struct SummaryStats {
    Experiment experiment = Experiment::clt;
    int trials = 0;
    int failures = 0;
    std::vector<FunctionSummary> functions;
    MatrixXd covariance;  // of the real parts across functions
    nlohmann::json to_json() const;
};

// Raw per-trial linear statistics for a config (also used by run_clt).
std::vector<TrialResult> run_trials(const ExperimentConfig& cfg);

SummaryStats summarize_clt(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials);
SummaryStats run_clt(const ExperimentConfig& cfg);

struct CorrelationEstimate {
    // universality
    double ks_distance = 0.0;
    double ks_p = 0.0;
    double control_ks_distance = 0.0;
    std::vector<double> rescaled_real, rescaled_reference, rescaled_control;
    // independence
    double correlation = 0.0;
    double joint_vs_product = 0.0;
    double eta = 0.0;
    std::vector<double> mean_rescaled;  // mean n rho lambda_1 per z (scale-invariance check)
    nlohmann::json to_json() const;
};

CorrelationEstimate run_universality(const ExperimentConfig& cfg);
CorrelationEstimate run_independence(const ExperimentConfig& cfg);

struct DbmCouplingReport {
    int n = 0;
    double t_final = 0.0;
    std::vector<int> strides;
    std::vector<double> strided_dt;
    std::vector<double> coupling_error;        // mean max |lambda_matrix - x_sde| per stride
    bool coupling_error_decreasing = false;
    double ks_regularized_vs_ginibre = 0.0;    // rescaled lambda_1
    double ks_p = 0.0;
    int ks_runs = 0;
    double median_shared_distance_n = 0.0;     // median max_{i<=K}|lambda - lambda_reg| times n
    int shared_runs = 0;
    int cutoff_inactive_steps = 0;
    nlohmann::json to_json() const;
};

DbmCouplingReport run_dbm_coupling(const ExperimentConfig& cfg);

struct GirkoReport {
    int n = 0;
    std::string function;
    cplx direct;  // sum_i f(sigma_i)
    std::vector<int> levels;
    std::vector<cplx> girko;
    std::vector<double> relative_residual;
    std::vector<double> error_estimate;
    bool monotone = false;
    nlohmann::json to_json() const;
};

GirkoReport run_girko_check(const ExperimentConfig& cfg);

struct EdelmanReport {
    int n = 0;
    int trials = 0;
    int interior_bins = 0;
    int bins_within = 0;  // |count - expected| <= 3 SE
    double fraction_within = 0.0;
    struct Bin {
        double x0, x1, y0, y1;
        double observed, se, expected, z;
    };
    std::vector<Bin> bins;
    // 1/n correction at fixed y: rho_n(x+iy) ~ 1/pi + c/n.
    double y_fit = 0.0;
    double fitted_coefficient = 0.0;  // least-squares c from the exact formula over several n
    double predicted_coefficient = 0.0;  // -1/(4 pi y^2)
    double mc_fitted_coefficient = 0.0;  // same fit from simulated strip densities (diagnostic)
    double mc_fitted_se = 0.0;
    nlohmann::json to_json() const;
};

EdelmanReport run_edelman(const ExperimentConfig& cfg);

struct OverlapReport {
    std::vector<int> n_values;
    std::vector<double> median_max_overlap;
    bool strictly_decreasing = false;
    int window = 5;
    nlohmann::json to_json() const;
};

OverlapReport run_overlaps(const ExperimentConfig& cfg);

// Normality of standardized real and imaginary parts (imaginary skipped when constant).
struct ComplexNormality {
    NormalityResult re;
    std::optional<NormalityResult> im;
};
ComplexNormality normality_test(const std::vector<cplx>& samples);

void persist(const std::vector<TrialResult>& results, const std::string& path, const nlohmann::json& meta = {});
std::vector<TrialResult> load_trials(const std::string& path, long* last_complete = nullptr);
void write_summary_csv(const SummaryStats& s, const std::string& path);

}  // namespace sclt

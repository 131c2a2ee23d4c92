#include "sclt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <thread>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "sclt/mde.hpp"
#include "sclt/persist.hpp"
#include "sclt/spectral.hpp"
#include "sclt/testfn.hpp"

namespace sclt {

using nlohmann::json;

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPECTRA_CLT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::int64_t>(count, 1))));
    if (threads == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

VectorXcd nonhermitian_eigenvalues(const MatrixXd& X) {
    const lapack_int n = static_cast<lapack_int>(X.rows());
    require(X.rows() == X.cols(), ErrorCode::dimension_mismatch, "eigenvalues need a square matrix");
    MatrixXd A = X;  // column-major copy, overwritten by LAPACK
    VectorXd wr(n), wi(n);
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, wr.data(), wi.data(), nullptr, 1, nullptr, 1);
    require(info == 0, ErrorCode::numerical_failure, "dgeev failed with info " + std::to_string(info));
    VectorXcd ev(n);
    for (lapack_int i = 0; i < n; ++i) ev(i) = cplx(wr(i), wi(i));
    return ev;
}

VectorXcd nonhermitian_eigenvalues(const MatrixXcd& X) {
    const lapack_int n = static_cast<lapack_int>(X.rows());
    require(X.rows() == X.cols(), ErrorCode::dimension_mismatch, "eigenvalues need a square matrix");
    MatrixXcd A = X;
    VectorXcd w(n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, w.data(), nullptr, 1, nullptr, 1);
    require(info == 0, ErrorCode::numerical_failure, "zgeev failed with info " + std::to_string(info));
    return w;
}

VectorXcd nonhermitian_eigenvalues(const MatrixSample& X) {
    return X.is_real() ? nonhermitian_eigenvalues(X.real_data()) : nonhermitian_eigenvalues(X.data);
}

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::clt: return "clt";
        case Experiment::universality: return "universality";
        case Experiment::independence: return "independence";
        case Experiment::dbm_coupling: return "dbm_coupling";
        case Experiment::girko_check: return "girko_check";
        case Experiment::edelman: return "edelman";
        case Experiment::overlaps: return "overlaps";
    }
    return "unknown";
}

Experiment experiment_from_name(const std::string& s) {
    for (Experiment e : {Experiment::clt, Experiment::universality, Experiment::independence, Experiment::dbm_coupling,
                         Experiment::girko_check, Experiment::edelman, Experiment::overlaps})
        if (experiment_name(e) == s) return e;
    throw Error(ErrorCode::config_error, "unknown experiment '" + s + "'");
}

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    static const std::vector<std::string> known = {"experiment",  "symmetry", "law",      "n",
                                                   "seed",        "trials",   "test_functions", "z_points",
                                                   "eta_grid",    "exponents", "output_path", "threads",
                                                   "extra"};
    require(j.is_object(), ErrorCode::config_error, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        require(std::find(known.begin(), known.end(), it.key()) != known.end(), ErrorCode::config_error,
                "unknown config key '" + it.key() + "'");
    ExperimentConfig c;
    try {
        c.experiment = experiment_from_name(j.at("experiment").get<std::string>());
        const std::string sym = j.value("symmetry", "real");
        require(sym == "real" || sym == "complex", ErrorCode::config_error, "symmetry must be real or complex");
        c.spec.symmetry = sym == "real" ? Symmetry::real : Symmetry::complex;
        c.spec.law = law_from_name(j.value("law", "gaussian"));
        c.spec.n = j.value("n", 100);
        c.spec.seed = j.value("seed", std::uint64_t{0});
        c.trials = j.value("trials", 100);
        if (j.contains("test_functions")) c.test_functions = j["test_functions"].get<std::vector<std::string>>();
        if (j.contains("z_points"))
            for (const auto& z : j["z_points"]) c.z_points.push_back(complex_from_json(z));
        if (j.contains("eta_grid")) c.eta_grid = j["eta_grid"].get<std::vector<double>>();
        if (j.contains("exponents")) {
            const json& e = j["exponents"];
            c.exponents.omega_E = e.value("omega_E", c.exponents.omega_E);
            c.exponents.omega_r = e.value("omega_r", c.exponents.omega_r);
            c.exponents.omega_f = e.value("omega_f", c.exponents.omega_f);
            c.exponents.delta_0 = e.value("delta_0", c.exponents.delta_0);
            c.exponents.delta_1 = e.value("delta_1", c.exponents.delta_1);
        }
        c.output_path = j.value("output_path", "");
        c.threads = j.value("threads", 0);
        if (j.contains("extra")) c.extra = j["extra"];
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::config_error, e.what());
    }
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = experiment_name(experiment);
    j["symmetry"] = spec.symmetry == Symmetry::real ? "real" : "complex";
    j["law"] = law_name(spec.law);
    j["n"] = spec.n;
    j["seed"] = spec.seed;
    j["trials"] = trials;
    j["test_functions"] = test_functions;
    json zs = json::array();
    for (cplx z : z_points) zs.push_back(complex_to_json(z));
    j["z_points"] = zs;
    j["eta_grid"] = eta_grid;
    j["exponents"] = {{"omega_E", exponents.omega_E},
                      {"omega_r", exponents.omega_r},
                      {"omega_f", exponents.omega_f},
                      {"delta_0", exponents.delta_0},
                      {"delta_1", exponents.delta_1}};
    j["output_path"] = output_path;
    j["threads"] = threads;
    j["extra"] = extra;
    return j;
}

double ExperimentConfig::extra_double(const std::string& key, double fallback) const {
    return extra.contains(key) ? extra[key].get<double>() : fallback;
}

int ExperimentConfig::extra_int(const std::string& key, int fallback) const {
    return extra.contains(key) ? extra[key].get<int>() : fallback;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::config_error, m); };
    if (spec.n < 2) fail("n must be at least 2");
    if (trials < 1) fail("trials must be positive");
    for (const auto& f : test_functions) parse_test_function(f);
    const double sep = extra_double("separation", 0.1);
    switch (experiment) {
        case Experiment::clt:
            if (spec.symmetry != Symmetry::real) fail("clt predictions are for the real class");
            if (trials < 100) fail("clt needs at least 100 trials");
            if (test_functions.empty()) fail("clt needs test functions");
            break;
        case Experiment::universality: {
            if (z_points.empty()) fail("universality needs a z point");
            const cplx z = z_points[0];
            if (std::abs(z) > 1.0 - extra_double("epsilon", 0.05)) fail("universality needs |z| <= 1 - epsilon");
            if (std::abs(z.imag()) < extra_double("min_imag", 0.2)) fail("universality needs |Im z| of order one");
            break;
        }
        case Experiment::independence: {
            if (z_points.size() < 2) fail("independence needs two z points");
            const cplx a = z_points[0], b = z_points[1];
            if (std::abs(a - b) < sep || std::abs(a - std::conj(b)) < sep || std::abs(a - std::conj(a)) < sep ||
                std::abs(b - std::conj(b)) < sep)
                fail("independence needs |z1-z2|, |z1-conj z2|, |zl-conj zl| >= " + std::to_string(sep));
            if (std::abs(a) >= 1.0 || std::abs(b) >= 1.0) fail("independence needs |z| < 1");
            break;
        }
        case Experiment::dbm_coupling:
            if (spec.n > 64) fail("dbm_coupling is limited to n <= 64");
            if (z_points.empty()) fail("dbm_coupling needs a z point");
            if (std::abs(z_points[0]) >= 1.0) fail("dbm_coupling needs |z| < 1");
            break;
        case Experiment::girko_check:
            if (test_functions.empty()) fail("girko_check needs a compactly supported test function");
            if (!std::isfinite(parse_test_function(test_functions[0]).support_radius))
                fail("girko_check needs a compactly supported test function");
            break;
        case Experiment::edelman:
            if (spec.symmetry != Symmetry::real) fail("edelman density is for the real Ginibre class");
            if (spec.law.kind != LawKind::gaussian) fail("edelman density is for Gaussian entries");
            break;
        case Experiment::overlaps:
            if (z_points.size() < 2) fail("overlaps needs two z points");
            break;
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::config_error, "cannot read config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c = ExperimentConfig::from_json(j);
    c.validate();
    return c;
}

// ---------------------------------------------------------------- trials

json TrialResult::to_json() const {
    json j;
    j["trial"] = trial_index;
    json L = json::array(), G = json::array();
    for (cplx v : linear_statistics) L.push_back(complex_to_json(v));
    for (cplx v : resolvent_traces) G.push_back(complex_to_json(v));
    j["L"] = L;
    j["G"] = G;
    j["smin"] = smallest_singular_values;
    j["runtime"] = runtime;
    j["failed"] = failed;
    if (failed) j["error"] = error;
    return j;
}

TrialResult TrialResult::from_json(const json& j) {
    TrialResult r;
    try {
        r.trial_index = j.at("trial").get<std::int64_t>();
        for (const auto& v : j.at("L")) r.linear_statistics.push_back(complex_from_json(v));
        for (const auto& v : j.at("G")) r.resolvent_traces.push_back(complex_from_json(v));
        r.smallest_singular_values = j.at("smin").get<std::vector<double>>();
        r.runtime = j.value("runtime", 0.0);
        r.failed = j.value("failed", false);
        r.error = j.value("error", "");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_mismatch, std::string("bad trial record: ") + e.what());
    }
    return r;
}

bool TrialResult::operator==(const TrialResult& o) const {
    // runtime is wall-clock and deliberately excluded
    return trial_index == o.trial_index && linear_statistics == o.linear_statistics &&
           resolvent_traces == o.resolvent_traces && smallest_singular_values == o.smallest_singular_values &&
           failed == o.failed && error == o.error;
}

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg) {
    std::vector<TestFunction> fs;
    for (const auto& s : cfg.test_functions) fs.push_back(parse_test_function(s));
    std::vector<TrialResult> out(cfg.trials);
    parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::int64_t t) {
        const auto start = std::chrono::steady_clock::now();
        TrialResult& r = out[t];
        r.trial_index = t;
        try {
            const MatrixSample X = sample_iid(cfg.spec, t);
            if (!fs.empty()) {
                const VectorXcd ev = nonhermitian_eigenvalues(X);
                for (const auto& f : fs) {
                    cplx acc = 0.0;
                    for (Eigen::Index i = 0; i < ev.size(); ++i) acc += f(ev(i));
                    r.linear_statistics.push_back(acc);
                }
            }
            for (cplx z : cfg.z_points) {
                const VectorXd s = singular_values(X.data, z);
                r.smallest_singular_values.push_back(s(0));
                for (double eta : cfg.eta_grid) r.resolvent_traces.push_back(resolvent_trace(s, eta));
            }
        } catch (const Error& e) {
            r.failed = true;
            r.error = e.what();
            r.linear_statistics.clear();
            r.resolvent_traces.clear();
            r.smallest_singular_values.clear();
        }
        r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    return out;
}

ComplexNormality normality_test(const std::vector<cplx>& samples) {
    std::vector<double> re, im;
    for (cplx v : samples) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    ComplexNormality r;
    r.re = normality_test(re);
    const double sre = std::sqrt(variance(re));
    const double sim = std::sqrt(variance(im));
    if (sim > 1e-8 * (1.0 + sre)) r.im = normality_test(im);
    return r;
}

SummaryStats summarize_clt(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials) {
    SummaryStats s;
    s.experiment = Experiment::clt;
    const double k4 = kappa4_of(cfg.spec.law);
    std::vector<const TrialResult*> ok;
    for (const auto& t : trials) {
        if (t.failed)
            ++s.failures;
        else
            ok.push_back(&t);
    }
    s.trials = static_cast<int>(ok.size());
    const int nf = static_cast<int>(cfg.test_functions.size());
    MatrixXd re(s.trials, nf);
    for (int k = 0; k < nf; ++k) {
        const TestFunction f = parse_test_function(cfg.test_functions[k]);
        FunctionSummary fsum;
        fsum.name = f.name;
        std::vector<double> a, b;
        std::vector<cplx> L;
        for (int t = 0; t < s.trials; ++t) {
            const cplx v = ok[t]->linear_statistics[k];
            a.push_back(v.real());
            b.push_back(v.imag());
            L.push_back(v);
            re(t, k) = v.real();
        }
        fsum.mean_re = batch_mean(a);
        fsum.mean_im = batch_mean(b);
        const cplx m(fsum.mean_re.value, fsum.mean_im.value);
        std::vector<double> dev2;
        for (cplx v : L) dev2.push_back(std::norm(v - m) * s.trials / (s.trials - 1.0));
        fsum.variance = batch_mean(dev2);
        fsum.batch_over_naive_se = fsum.mean_re.se / std::max(naive_se(a), 1e-300);
        fsum.prediction = predict(f, k4, cfg.spec.n);
        fsum.predicted_mean = fsum.prediction.E_f;
        fsum.predicted_variance = fsum.prediction.V_f;
        fsum.z_mean = fsum.mean_re.z(fsum.predicted_mean.real());
        fsum.z_variance = fsum.variance.z(fsum.predicted_variance);
        if (s.trials >= 500) {
            const ComplexNormality cn = normality_test(L);
            fsum.normal_re = cn.re;
            fsum.normal_im = cn.im;
        }
        s.functions.push_back(fsum);
    }
    if (s.trials >= 2 && nf > 0) s.covariance = covariance_matrix(re);
    return s;
}

SummaryStats run_clt(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto trials = run_trials(cfg);
    if (!cfg.output_path.empty()) persist(trials, cfg.output_path, cfg.to_json());
    return summarize_clt(cfg, trials);
}

namespace {

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

json normality_json(const NormalityResult& r) {
    return {{"n", r.n},         {"anderson_darling", r.anderson_darling}, {"ad_p", r.ad_p},
            {"skewness", r.skew}, {"excess_kurtosis", r.kurt},           {"jarque_bera", r.jarque_bera},
            {"jb_p", r.jb_p}};
}

}  // namespace

json SummaryStats::to_json() const {
    json j;
    j["experiment"] = experiment_name(experiment);
    j["trials"] = trials;
    j["failures"] = failures;
    json fs = json::array();
    for (const auto& f : functions) {
        json x;
        x["name"] = f.name;
        x["mean_re"] = estimate_json(f.mean_re);
        x["mean_im"] = estimate_json(f.mean_im);
        x["variance"] = estimate_json(f.variance);
        x["predicted_mean"] = complex_to_json(f.predicted_mean);
        x["predicted_variance"] = f.predicted_variance;
        x["z_mean"] = f.z_mean;
        x["z_variance"] = f.z_variance;
        x["batch_over_naive_se"] = f.batch_over_naive_se;
        if (f.normal_re) x["normality_re"] = normality_json(*f.normal_re);
        if (f.normal_im) x["normality_im"] = normality_json(*f.normal_im);
        x["prediction"] = f.prediction.to_json();
        fs.push_back(x);
    }
    j["functions"] = fs;
    json cov = json::array();
    for (Eigen::Index r = 0; r < covariance.rows(); ++r) {
        std::vector<double> row(covariance.cols());
        for (Eigen::Index c = 0; c < covariance.cols(); ++c) row[c] = covariance(r, c);
        cov.push_back(row);
    }
    j["covariance_re"] = cov;
    return j;
}

// ---------------------------------------------------------------- universality / independence

json CorrelationEstimate::to_json() const {
    return {{"ks_distance", ks_distance},
            {"ks_p", ks_p},
            {"control_ks_distance", control_ks_distance},
            {"correlation", correlation},
            {"joint_vs_product", joint_vs_product},
            {"eta", eta},
            {"mean_rescaled", mean_rescaled},
            {"samples", rescaled_real.size()}};
}

namespace {

MatrixXcd complex_ginibre(int n, std::uint64_t seed, std::int64_t trial) {
    Philox rng(seed, static_cast<std::uint64_t>(trial), stream_tag::ginibre);
    return standard_gaussian(n, Symmetry::complex, rng) / std::sqrt(static_cast<double>(n));
}

}  // namespace

CorrelationEstimate run_universality(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n = cfg.spec.n;
    const cplx z = cfg.z_points[0];
    const cplx zc = cfg.extra.contains("control_z") ? complex_from_json(cfg.extra["control_z"]) : cplx(0.5, 0.0);
    const bool ref_at_zero = cfg.extra.value("reference_at_zero", false);
    const cplx zr = ref_at_zero ? cplx(0.0) : z;
    const cplx z2 = cfg.extra.contains("second_z") ? complex_from_json(cfg.extra["second_z"]) : cplx(-0.2, 0.6);
    const int second_trials = cfg.extra_int("second_trials", std::max(100, cfg.trials / 4));
    const double rho = density(z, 0.0), rho_c = density(zc, 0.0), rho_r = density(zr, 0.0), rho2 = density(z2, 0.0);

    CorrelationEstimate e;
    e.rescaled_real.assign(cfg.trials, 0.0);
    e.rescaled_reference.assign(cfg.trials, 0.0);
    e.rescaled_control.assign(cfg.trials, 0.0);
    std::vector<double> second(second_trials, 0.0);
    const int threads = resolve_threads(cfg.threads);
    EnsembleSpec spec = cfg.spec;
    parallel_for(cfg.trials, threads, [&](std::int64_t t) {
        const MatrixSample X = sample_iid(spec, t);
        e.rescaled_real[t] = n * rho * singular_values(X.data, z)(0);
        e.rescaled_control[t] = n * rho_c * singular_values(X.data, zc)(0);
        e.rescaled_reference[t] = n * rho_r * singular_values(complex_ginibre(n, spec.seed, t), zr)(0);
    });
    parallel_for(second_trials, threads, [&](std::int64_t t) {
        const MatrixSample X = sample_iid(spec, t);
        second[t] = n * rho2 * singular_values(X.data, z2)(0);
    });
    const KsResult ks = ks_two_sample(e.rescaled_real, e.rescaled_reference);
    e.ks_distance = ks.D;
    e.ks_p = ks.p;
    e.control_ks_distance = ks_two_sample(e.rescaled_control, e.rescaled_reference).D;
    e.mean_rescaled = {mean(e.rescaled_real), mean(second)};
    return e;
}

CorrelationEstimate run_independence(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n = cfg.spec.n;
    const cplx z1 = cfg.z_points[0], z2 = cfg.z_points[1];
    const double eta = cfg.eta_grid.empty() ? std::pow(static_cast<double>(n), -1.0 + cfg.exponents.delta_1)
                                            : cfg.eta_grid[0];
    const double lo = std::pow(static_cast<double>(n), -1.0 - cfg.exponents.delta_0);
    const double hi = std::pow(static_cast<double>(n), -1.0 + cfg.exponents.delta_1);
    require(eta >= lo * (1 - 1e-12) && eta <= hi * (1 + 1e-12), ErrorCode::config_error,
            "eta outside the mesoscopic window [n^{-1-delta_0}, n^{-1+delta_1}]");
    std::vector<double> g1(cfg.trials), g2(cfg.trials), l1(cfg.trials), l2(cfg.trials);
    parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::int64_t t) {
        const MatrixSample X = sample_iid(cfg.spec, t);
        const VectorXd s1 = singular_values(X.data, z1), s2 = singular_values(X.data, z2);
        g1[t] = resolvent_trace(s1, eta).imag();
        g2[t] = resolvent_trace(s2, eta).imag();
        l1[t] = s1(0);
        l2[t] = s2(0);
    });
    CorrelationEstimate e;
    e.eta = eta;
    e.correlation = pearson(g1, g2);
    e.joint_vs_product = joint_vs_product_distance(l1, l2, cfg.extra_int("bins", 8));
    e.rescaled_real = l1;
    e.rescaled_reference = l2;
    return e;
}

// ---------------------------------------------------------------- DBM

json DbmCouplingReport::to_json() const {
    return {{"n", n},
            {"t_final", t_final},
            {"strides", strides},
            {"dt", strided_dt},
            {"coupling_error", coupling_error},
            {"coupling_error_decreasing", coupling_error_decreasing},
            {"ks_regularized_vs_ginibre", ks_regularized_vs_ginibre},
            {"ks_p", ks_p},
            {"ks_runs", ks_runs},
            {"median_shared_distance_times_n", median_shared_distance_n},
            {"shared_runs", shared_runs},
            {"cutoff_inactive_steps", cutoff_inactive_steps}};
}

namespace {

double median(std::vector<double> v) {
    require(!v.empty(), ErrorCode::degenerate_sample, "median of an empty sample");
    std::sort(v.begin(), v.end());
    const size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

DbmCouplingReport run_dbm_coupling(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n = cfg.spec.n;
    const cplx z = cfg.z_points[0];
    const int threads = resolve_threads(cfg.threads);
    DbmExponents ex{cfg.exponents.omega_E, cfg.exponents.omega_r, cfg.exponents.omega_f};
    StepOptions opt;
    opt.exponents = ex;
    const double threshold = std::pow(static_cast<double>(n), -ex.omega_E);
    EnsembleSpec spec = cfg.spec;

    DbmCouplingReport rep;
    rep.n = n;

    // 1. strong coupling of the matrix flow and the raw SDE under dt refinement
    const double t_c = cfg.extra_double("coupling_t_factor", 0.2) / n;
    const int fine = cfg.extra_int("fine_steps", 64);
    rep.strides = cfg.extra.contains("strides") ? cfg.extra["strides"].get<std::vector<int>>() : std::vector<int>{16, 4, 1};
    const int coupling_runs = cfg.extra_int("coupling_runs", 10);
    std::vector<std::vector<double>> errs(rep.strides.size(), std::vector<double>(coupling_runs));
    parallel_for(coupling_runs, threads, [&](std::int64_t r) {
        const MatrixSample X0 = sample_iid(spec, 1000000 + r);
        const auto traj = matrix_flow_trajectory(X0, z, t_c, t_c / fine, splitmix64(spec.seed + 17 * r + 1));
        const VectorXd& lam = traj.decompositions.back().lambda;
        for (size_t k = 0; k < rep.strides.size(); ++k) {
            const DbmState s = sde_from_matrix_flow(traj, rep.strides[k], opt);
            errs[k][r] = (s.x - lam).cwiseAbs().maxCoeff();
        }
    });
    for (size_t k = 0; k < rep.strides.size(); ++k) {
        rep.strided_dt.push_back(rep.strides[k] * t_c / fine);
        rep.coupling_error.push_back(mean(errs[k]));
    }
    rep.coupling_error_decreasing = true;
    for (size_t k = 1; k < rep.coupling_error.size(); ++k)
        if (!(rep.coupling_error[k] < rep.coupling_error[k - 1])) rep.coupling_error_decreasing = false;

    // 2. regularized process vs complex Ginibre DBM at t_f, in distribution
    const double t_f = std::pow(static_cast<double>(n), -1.0 + ex.omega_f);
    rep.t_final = t_f;
    const int sde_steps = cfg.extra_int("sde_steps", 400);
    const int checkpoints = cfg.extra_int("checkpoints", 10);
    require(sde_steps % checkpoints == 0, ErrorCode::config_error, "sde_steps must be a multiple of checkpoints");
    const double dt = t_f / sde_steps;
    const int per_cp = sde_steps / checkpoints;
    rep.ks_runs = cfg.trials;
    std::vector<double> a(cfg.trials), b(cfg.trials);
    std::vector<int> inactive(cfg.trials, 0);
    const double scale_a = n * flow_density(z, t_f, 0.0);
    const double scale_b = n * flow_density(0.0, t_f, 0.0);
    parallel_for(cfg.trials, threads, [&](std::int64_t r) {
        const MatrixSample X0 = sample_iid(spec, r);
        const auto cp = matrix_flow_trajectory(X0, z, t_f, t_f / checkpoints, splitmix64(spec.seed ^ (0x9e37ULL + r)));
        std::vector<CorrelationModel> models;
        for (const auto& d : cp.decompositions) models.push_back(CorrelationModel::from_overlaps(lambda_overlaps(d), threshold));
        DbmState s = make_state(cp.decompositions.front().lambda, DbmKind::regularized);
        for (int k = 0; k < sde_steps; ++k) {
            const int c = k / per_cp;
            const double theta = static_cast<double>(k % per_cp) / per_cp;
            const CorrelationModel m = CorrelationModel::interpolate(models[c], models[c + 1], theta);
            if (!m.cutoff_active) ++inactive[r];
            Philox rng(spec.seed, static_cast<std::uint64_t>(r), stream_tag::dbm + 2 * k);
            const NoiseBlock nb = make_noise(m, DbmKind::regularized, dt, rng);
            Philox bridge(spec.seed, static_cast<std::uint64_t>(r), stream_tag::dbm + 2 * k + 1);
            s = step(s, m, dt, nb, bridge, opt);
        }
        a[r] = scale_a * s.x(0);

        const MatrixXcd G = complex_ginibre(n, spec.seed, r);
        DbmState mu = make_state(singular_values(G, 0.0), DbmKind::ginibre);
        const CorrelationModel zero = CorrelationModel::zero(n);
        for (int k = 0; k < sde_steps; ++k) {
            Philox rng(spec.seed ^ 0x6d75ULL, static_cast<std::uint64_t>(r), stream_tag::dbm + 2 * k);
            const NoiseBlock nb = make_noise(zero, DbmKind::ginibre, dt, rng);
            Philox bridge(spec.seed ^ 0x6d75ULL, static_cast<std::uint64_t>(r), stream_tag::dbm + 2 * k + 1);
            mu = step(mu, zero, dt, nb, bridge, opt);
        }
        b[r] = scale_b * mu.x(0);
    });
    const KsResult ks = ks_two_sample(a, b);
    rep.ks_regularized_vs_ginibre = ks.D;
    rep.ks_p = ks.p;
    for (int v : inactive) rep.cutoff_inactive_steps += v;

    // 3. shared-noise coupling of the matrix flow and the regularized process
    rep.shared_runs = cfg.extra_int("shared_runs", 20);
    const int shared_steps = cfg.extra_int("shared_steps", 200);
    const int window = cfg.extra_int("window", 3);
    if (rep.shared_runs > 0) {
        std::vector<double> dist(rep.shared_runs);
        parallel_for(rep.shared_runs, threads, [&](std::int64_t r) {
            const MatrixSample X0 = sample_iid(spec, 2000000 + r);
            const auto traj =
                matrix_flow_trajectory(X0, z, t_f, t_f / shared_steps, splitmix64(spec.seed + 31 * r + 7));
            DbmState s = make_state(traj.decompositions.front().lambda, DbmKind::regularized);
            for (int k = 0; k < shared_steps; ++k) {
                const CorrelationModel m =
                    CorrelationModel::from_overlaps(lambda_overlaps(traj.decompositions[k]), threshold);
                NoiseBlock nb;
                nb.dt = t_f / shared_steps;
                nb.mode = NoiseMode::shared_matrix_projection;
                nb.db = traj.projected_noise[k];
                if (!m.cutoff_active) {
                    // d b_reg = (I/2)^{1/2} C^{-1/2} d b
                    nb.db = std::sqrt(0.5) * (psd_inv_sqrt(noise_covariance(m, DbmKind::raw)) * nb.db);
                }
                nb.S = psd_sqrt(noise_covariance(m, DbmKind::regularized), &nb.report);
                Philox bridge(spec.seed, static_cast<std::uint64_t>(r), stream_tag::dbm + 0x100000 + k);
                s = step(s, m, nb.dt, nb, bridge, opt);
            }
            DbmState lam = make_state(traj.decompositions.back().lambda, DbmKind::raw, 0.0, t_f);
            dist[r] = n * coupling_distance(lam, s, std::min(window, n));
        });
        rep.median_shared_distance_n = median(dist);
    }
    return rep;
}

// ---------------------------------------------------------------- Girko

json GirkoReport::to_json() const {
    json g = json::array();
    for (cplx v : girko) g.push_back(complex_to_json(v));
    return {{"n", n},
            {"function", function},
            {"direct", complex_to_json(direct)},
            {"levels", levels},
            {"girko", g},
            {"relative_residual", relative_residual},
            {"error_estimate", error_estimate},
            {"monotone", monotone}};
}

GirkoReport run_girko_check(const ExperimentConfig& cfg) {
    cfg.validate();
    const TestFunction f = parse_test_function(cfg.test_functions[0]);
    GirkoReport rep;
    rep.n = cfg.spec.n;
    rep.function = f.name;
    rep.levels = cfg.extra.contains("levels") ? cfg.extra["levels"].get<std::vector<int>>() : std::vector<int>{32, 64, 128};
    const MatrixSample X = sample_iid(cfg.spec, cfg.extra_int("trial", 0));
    const VectorXcd ev = nonhermitian_eigenvalues(X);
    for (Eigen::Index i = 0; i < ev.size(); ++i) rep.direct += f(ev(i));
    for (int N : rep.levels) {
        GirkoGrid g;
        g.intervals = N;
        const GirkoResult r = girko_evaluate(X.data, f, {}, g);
        rep.girko.push_back(r.value);
        rep.relative_residual.push_back(std::abs(r.value - rep.direct) / std::max(1.0, std::abs(rep.direct)));
        rep.error_estimate.push_back(r.error_estimate);
    }
    rep.monotone = true;
    for (size_t k = 1; k < rep.relative_residual.size(); ++k)
        if (!(rep.relative_residual[k] < rep.relative_residual[k - 1])) rep.monotone = false;
    return rep;
}

// ---------------------------------------------------------------- Edelman

json EdelmanReport::to_json() const {
    json bs = json::array();
    for (const auto& b : bins)
        bs.push_back({{"x0", b.x0}, {"x1", b.x1}, {"y0", b.y0}, {"y1", b.y1}, {"observed", b.observed},
                      {"se", b.se}, {"expected", b.expected}, {"z", b.z}});
    return {{"n", n},
            {"trials", trials},
            {"interior_bins", interior_bins},
            {"bins_within", bins_within},
            {"fraction_within", fraction_within},
            {"y_fit", y_fit},
            {"fitted_coefficient", fitted_coefficient},
            {"predicted_coefficient", predicted_coefficient},
            {"mc_fitted_coefficient", mc_fitted_coefficient},
            {"mc_fitted_se", mc_fitted_se},
            {"bins", bs}};
}

namespace {

// n * int over the box of rho_n, 8x8 Gauss-Legendre
double expected_count(int n, double x0, double x1, double y0, double y1) {
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    double acc = 0.0;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            const double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx[a];
            const double y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * gx[b];
            acc += gw[a] * gw[b] * edelman_density(cplx(x, y), n);
        }
    return n * acc * 0.25 * (x1 - x0) * (y1 - y0);
}

}  // namespace

EdelmanReport run_edelman(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n = cfg.spec.n;
    const int threads = resolve_threads(cfg.threads);
    const double h = cfg.extra_double("bin_width", 0.1);
    const double rmax = cfg.extra_double("radius", 0.8);
    const double ymin = cfg.extra_double("y_min_factor", 3.0) / std::sqrt(static_cast<double>(n));
    const int nbx = static_cast<int>(std::lround(2 * rmax / h)), nby = static_cast<int>(std::lround(rmax / h));

    EdelmanReport rep;
    rep.n = n;
    rep.trials = cfg.trials;
    std::vector<MatrixXd> counts(cfg.trials, MatrixXd::Zero(nbx, nby));
    parallel_for(cfg.trials, threads, [&](std::int64_t t) {
        const VectorXcd ev = nonhermitian_eigenvalues(sample_iid(cfg.spec, t));
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            const cplx e = ev(i);
            if (e.imag() <= 0.0) continue;
            const int bx = static_cast<int>(std::floor((e.real() + rmax) / h));
            const int by = static_cast<int>(std::floor(e.imag() / h));
            if (bx >= 0 && bx < nbx && by >= 0 && by < nby) counts[t](bx, by) += 1.0;
        }
    });
    for (int bx = 0; bx < nbx; ++bx)
        for (int by = 0; by < nby; ++by) {
            const double x0 = -rmax + bx * h, x1 = x0 + h, y0 = by * h, y1 = y0 + h;
            const double far = std::hypot(std::max(std::abs(x0), std::abs(x1)), y1);
            if (y0 < ymin || far >= rmax) continue;  // interior bins only
            std::vector<double> c(cfg.trials);
            for (int t = 0; t < cfg.trials; ++t) c[t] = counts[t](bx, by);
            EdelmanReport::Bin b{x0, x1, y0, y1, mean(c), naive_se(c), expected_count(n, x0, x1, y0, y1), 0.0};
            b.z = b.se > 0 ? (b.observed - b.expected) / b.se : 0.0;
            ++rep.interior_bins;
            if (std::abs(b.z) <= 3.0) ++rep.bins_within;
            rep.bins.push_back(b);
        }
    rep.fraction_within = rep.interior_bins ? static_cast<double>(rep.bins_within) / rep.interior_bins : 0.0;

    // 1/n correction at fixed y from the exact finite-n density
    rep.y_fit = cfg.extra_double("y_fit", 0.3);
    rep.predicted_coefficient = -1.0 / (4.0 * kPi * rep.y_fit * rep.y_fit);
    {
        std::vector<double> inv_n, scaled;
        for (int m : {400, 800, 1600, 3200, 6400}) {
            inv_n.push_back(1.0 / m);
            scaled.push_back(m * (edelman_density(cplx(0.0, rep.y_fit), m) - 1.0 / kPi));
        }
        rep.fitted_coefficient = linear_fit(inv_n, scaled).intercept;
    }

    // Same fit from simulated densities in a thin strip (diagnostic).
    const std::vector<int> mc_n =
        cfg.extra.contains("mc_n") ? cfg.extra["mc_n"].get<std::vector<int>>() : std::vector<int>{16, 32, 64, 128};
    const int mc_trials = cfg.extra_int("mc_trials", 1000);
    if (mc_trials > 0 && !mc_n.empty()) {
        const double ya = rep.y_fit - 0.05, yb = rep.y_fit + 0.05, xw = 0.5;
        Eigen::MatrixXd A(mc_n.size(), 2);
        VectorXd y(mc_n.size()), w(mc_n.size());
        for (size_t k = 0; k < mc_n.size(); ++k) {
            const int m = mc_n[k];
            EnsembleSpec sp = cfg.spec;
            sp.n = m;
            std::vector<double> c(mc_trials);
            parallel_for(mc_trials, threads, [&](std::int64_t t) {
                const VectorXcd ev = nonhermitian_eigenvalues(sample_iid(sp, 5000000 + t));
                double cnt = 0;
                for (Eigen::Index i = 0; i < ev.size(); ++i) {
                    const double y = std::abs(ev(i).imag());
                    if (y > ya && y < yb && std::abs(ev(i).real()) < xw) cnt += 0.5;  // conjugate pairs
                }
                c[t] = cnt;
            });
            const double area = (yb - ya) * 2 * xw;
            const double rho_hat = mean(c) / (m * area);
            const double se = naive_se(c) / (m * area);
            A(k, 0) = 1.0 / m;
            A(k, 1) = 1.0 / (static_cast<double>(m) * m);
            y(k) = rho_hat - 1.0 / kPi;
            w(k) = 1.0 / (se * se);
        }
        const MatrixXd AtW = A.transpose() * w.asDiagonal();
        const MatrixXd cov = (AtW * A).inverse();
        const VectorXd coef = cov * (AtW * y);
        // the strip average of 1/y^2 is 1/(ya yb); rescale to y_fit
        const double strip = rep.y_fit * rep.y_fit / (ya * yb);
        rep.mc_fitted_coefficient = coef(0) / strip;
        rep.mc_fitted_se = std::sqrt(cov(0, 0)) / strip;
    }
    return rep;
}

// ---------------------------------------------------------------- overlaps

json OverlapReport::to_json() const {
    return {{"n_values", n_values},
            {"median_max_overlap", median_max_overlap},
            {"strictly_decreasing", strictly_decreasing},
            {"window", window}};
}

OverlapReport run_overlaps(const ExperimentConfig& cfg) {
    cfg.validate();
    OverlapReport rep;
    rep.n_values =
        cfg.extra.contains("n_values") ? cfg.extra["n_values"].get<std::vector<int>>() : std::vector<int>{100, 200, 400};
    rep.window = cfg.extra_int("window", 5);
    const cplx z1 = cfg.z_points[0], z2 = cfg.z_points[1];
    for (int n : rep.n_values) {
        EnsembleSpec sp = cfg.spec;
        sp.n = n;
        std::vector<double> mx(cfg.trials);
        parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::int64_t t) {
            const MatrixSample X = sample_iid(sp, t);
            const auto d1 = decompose(hermitize(X.data, z1), sp.seed + 2 * t);
            const auto d2 = decompose(hermitize(X.data, z2), sp.seed + 2 * t + 1);
            mx[t] = overlaps(d1, d2, std::min(rep.window, n)).max_abs();
        });
        rep.median_max_overlap.push_back(median(mx));
    }
    rep.strictly_decreasing = true;
    for (size_t k = 1; k < rep.median_max_overlap.size(); ++k)
        if (!(rep.median_max_overlap[k] < rep.median_max_overlap[k - 1])) rep.strictly_decreasing = false;
    return rep;
}

// ---------------------------------------------------------------- persistence

void persist(const std::vector<TrialResult>& results, const std::string& path, const json& meta) {
    JsonlWriter w(path, "trial_result", meta);
    for (const auto& r : results) w.write(r.to_json());
}

std::vector<TrialResult> load_trials(const std::string& path, long* last_complete) {
    const JsonlContents c = load_jsonl(path, "trial_result");
    std::vector<TrialResult> out;
    for (const auto& j : c.records) out.push_back(TrialResult::from_json(j));
    if (last_complete) *last_complete = c.last_complete;
    return out;
}

void write_summary_csv(const SummaryStats& s, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const auto& f : s.functions)
        rows.push_back({f.name, num(f.mean_re.value), num(f.mean_re.se), num(f.predicted_mean.real()), num(f.z_mean),
                        num(f.variance.value), num(f.variance.se), num(f.predicted_variance), num(f.z_variance),
                        f.normal_re ? num(f.normal_re->ad_p) : ""});
    write_csv(path,
              {"function", "mean", "mean_se", "predicted_mean", "z_mean", "variance", "variance_se",
               "predicted_variance", "z_variance", "ad_p_re"},
              rows);
}

}  // namespace sclt

// spectra-clt: command-line front end for the library.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sclt/checks.hpp"
#include "sclt/cltpred.hpp"
#include "sclt/harness.hpp"
#include "sclt/mde.hpp"
#include "sclt/persist.hpp"
#include "sclt/spectral.hpp"
#include "sclt/testfn.hpp"

using namespace sclt;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> n;
    std::string out;
    std::optional<int> threads;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "JSON experiment config");
    sub->add_option("--seed", f.seed, "base seed (required)");
    sub->add_option("--trials", f.trials, "number of trials");
    sub->add_option("--n", f.n, "matrix dimension");
    sub->add_option("--out", f.out, "write a JSON-lines summary here");
    sub->add_option("--threads", f.threads, "worker threads (default: SPECTRA_CLT_THREADS or all cores)");
}

std::string num(double v, int prec = 6) {
    char b[64];
    std::snprintf(b, sizeof b, "%.*g", prec, v);
    return b;
}

std::string cnum(cplx z) { return format_complex(z, 6); }

ExperimentConfig defaults_for(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::clt:
            c.spec.n = 200;
            c.trials = 2000;
            c.test_functions = {"z", "z^2"};
            break;
        case Experiment::universality:
            c.spec.n = 300;
            c.trials = 2000;
            c.z_points = {cplx(0.3, 0.5)};
            break;
        case Experiment::independence:
            c.spec.n = 256;
            c.trials = 400;
            c.z_points = {cplx(0.4, 0.4), cplx(-0.4, 0.4)};
            break;
        case Experiment::dbm_coupling:
            c.spec.n = 32;
            c.trials = 500;
            c.z_points = {cplx(0.3, 0.4)};
            break;
        case Experiment::girko_check:
            c.spec.n = 100;
            c.trials = 1;
            c.test_functions = {"bump(0.1+0.2i,0.6)"};
            break;
        case Experiment::edelman:
            c.spec.n = 500;
            c.trials = 200;
            break;
        case Experiment::overlaps:
            c.trials = 20;
            c.z_points = {cplx(0.3, 0.2), cplx(-0.2, 0.5)};
            break;
    }
    return c;
}

ExperimentConfig resolve_config(Experiment e, const CommonFlags& f) {
    require(f.seed.has_value(), ErrorCode::config_error, "--seed is required for stochastic subcommands");
    ExperimentConfig c;
    if (!f.config.empty()) {
        c = load_config(f.config);
        require(c.experiment == e, ErrorCode::config_error,
                "config is for experiment '" + experiment_name(c.experiment) + "'");
    } else {
        c = defaults_for(e);
    }
    c.spec.seed = *f.seed;
    if (f.trials) c.trials = *f.trials;
    if (f.n) c.spec.n = *f.n;
    if (f.threads) c.threads = *f.threads;
    c.validate();
    return c;
}

void write_out(const std::string& path, const std::string& kind, const json& summary, const ExperimentConfig* cfg) {
    if (path.empty()) return;
    JsonlWriter w(path, kind, cfg ? cfg->to_json() : json());
    w.write(summary);
}

int report(bool pass) {
    std::cout << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear eigenvalue statistics of real i.i.d. matrices: predictions and experiments"};
    app.require_subcommand(1);

    // deterministic utilities
    std::string z_text = "0", w_text = "0+1i", f_text;
    double kappa4 = 0.0, t_flow = 0.0;
    int n_pred = 1;
    std::string out_path;

    auto* mde = app.add_subcommand("mde", "solve the Dyson equation at (z, w)");
    mde->add_option("--z", z_text, "complex z, e.g. 0.3+0.5i");
    mde->add_option("--w", w_text, "complex spectral parameter with Im w != 0");
    mde->add_option("--out", out_path, "write a JSON-lines record");

    auto* edg = app.add_subcommand("edges", "spectral edges and quantiles of the singular-value density");
    edg->add_option("--z", z_text, "complex z");
    edg->add_option("--n", n_pred, "print the first quantiles for this n");
    edg->add_option("--t", t_flow, "flow time for the density at the origin");
    edg->add_option("--out", out_path, "write a density CSV");

    auto* pred = app.add_subcommand("predict", "predicted expectation and variance of a linear statistic");
    pred->add_option("--f", f_text, "test function, e.g. z^2, re(z^3), bump(0.1+0.2i,0.5)")->required();
    pred->add_option("--kappa4", kappa4, "fourth cumulant of the entry law");
    pred->add_option("--n", n_pred, "matrix dimension (enters the bulk term only)");
    pred->add_option("--out", out_path, "write a JSON-lines record");

    auto* self = app.add_subcommand("selftest", "run the deterministic identity suite (no Monte Carlo)");

    // stochastic
    CommonFlags flags;
    std::string law = "gaussian", symmetry = "real";
    auto* smp = app.add_subcommand("sample", "draw one matrix and print its eigenvalues");
    add_common(smp, flags);
    smp->add_option("--law", law, "gaussian | rademacher | uniform");
    smp->add_option("--symmetry", symmetry, "real | complex");

    struct Exp {
        const char* name;
        Experiment e;
        const char* help;
    };
    const Exp exps[] = {
        {"clt", Experiment::clt, "linear-statistic CLT against predictions"},
        {"universality", Experiment::universality, "smallest singular value vs complex Ginibre"},
        {"independence", Experiment::independence, "decorrelation of resolvents at separated z"},
        {"dbm", Experiment::dbm_coupling, "Dyson Brownian motion coupling experiment"},
        {"girko", Experiment::girko_check, "Girko formula vs direct eigenvalue sum"},
        {"edelman", Experiment::edelman, "real Ginibre complex-eigenvalue density"},
        {"overlaps", Experiment::overlaps, "singular-vector overlap decay"},
    };
    std::vector<std::pair<CLI::App*, Experiment>> exp_cmds;
    for (const auto& x : exps) {
        auto* s = app.add_subcommand(x.name, x.help);
        add_common(s, flags);
        exp_cmds.emplace_back(s, x.e);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*mde) {
            const MdeSolution s = solve_m(parse_complex(z_text), parse_complex(w_text));
            std::cout << "z = " << cnum(s.z) << "  w = " << cnum(s.w) << '\n'
                      << "m = " << cnum(s.m) << '\n'
                      << "u = " << cnum(s.u) << '\n'
                      << "rho = Im m / pi = " << num(s.m.imag() / kPi) << '\n'
                      << "|m|^2 + |u|^2|z|^2 = " << num(s.mubound()) << '\n'
                      << "residual = " << num(s.residual(), 3) << '\n';
            write_out(out_path, "mde",
                      {{"z", complex_to_json(s.z)}, {"w", complex_to_json(s.w)}, {"m", complex_to_json(s.m)},
                       {"u", complex_to_json(s.u)}, {"rho", s.m.imag() / kPi}, {"residual", s.residual()}},
                      nullptr);
            return kExitOk;
        }
        if (*edg) {
            const cplx z = parse_complex(z_text);
            const EdgeData e = edges(z);
            std::cout << "z = " << cnum(z) << '\n' << "e_plus = " << num(e.e_plus, 10) << '\n';
            if (e.e_minus) std::cout << "e_minus = " << num(*e.e_minus, 10) << '\n';
            if (e.semicircle_limit) std::cout << "(z = 0: semicircle limit)\n";
            std::cout << "rho(0) = " << num(flow_density(z, t_flow, 0.0), 10) << "  (t = " << num(t_flow) << ")\n";
            if (n_pred > 1) {
                const Quantiles q = quantiles(z, n_pred);
                std::cout << "gamma_1..5 =";
                for (int i = 1; i <= std::min(5, n_pred); ++i) std::cout << ' ' << num(q.gamma(i), 8);
                std::cout << '\n';
            }
            if (!out_path.empty()) write_density_csv(z, t_flow, e.e_plus * 1.1, 400, out_path);
            return kExitOk;
        }
        if (*pred) {
            const TestFunction f = parse_test_function(f_text);
            const PredictedMoments p = predict(f, kappa4, n_pred);
            const auto& e = p.e_terms;
            const auto& c = p.c_terms;
            std::cout << "f = " << p.function << "  kappa4 = " << num(kappa4) << "  n = " << n_pred << '\n'
                      << "E = " << cnum(p.E_f) << '\n'
                      << "  bulk " << cnum(e.bulk) << ", singular " << cnum(e.singular) << ", kappa4 "
                      << cnum(e.kappa4) << ", boundary " << cnum(e.boundary) << ", arcsine " << cnum(e.arcsine)
                      << ", endpoint " << cnum(e.endpoint) << '\n'
                      << "V = " << num(p.V_f) << '\n'
                      << "  gradient " << cnum(c.gradient) << ", H^1/2 " << cnum(c.h_half) << ", kappa4 "
                      << cnum(c.kappa4) << '\n'
                      << "E L(f)^2 - (E L(f))^2 = " << cnum(p.C_gf) << '\n';
            if (c.tail_flag) std::cout << "warning: slowly decaying Fourier tail\n";
            write_out(out_path, "prediction", p.to_json(), nullptr);
            return kExitOk;
        }
        if (*self) {
            bool ok = true;
            for (const auto& r : run_selftest()) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << num(r.measured, 3) << " (tol "
                          << num(r.tolerance, 3) << ")";
                if (!r.detail.empty()) std::cout << "  " << r.detail;
                std::cout << '\n';
                ok = ok && r.passed;
            }
            return report(ok);
        }
        if (*smp) {
            require(flags.seed.has_value(), ErrorCode::config_error, "--seed is required for stochastic subcommands");
            EnsembleSpec spec;
            spec.n = flags.n.value_or(100);
            spec.seed = *flags.seed;
            spec.law = law_from_name(law);
            require(symmetry == "real" || symmetry == "complex", ErrorCode::config_error,
                    "symmetry must be real or complex");
            spec.symmetry = symmetry == "real" ? Symmetry::real : Symmetry::complex;
            const MatrixSample X = sample_iid(spec, 0);
            const VectorXcd ev = nonhermitian_eigenvalues(X);
            int real_count = 0;
            double rmax = 0.0;
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                if (std::abs(ev(i).imag()) < 1e-10) ++real_count;
                rmax = std::max(rmax, std::abs(ev(i)));
            }
            std::cout << "n = " << spec.n << "  law = " << law_name(spec.law) << "  real eigenvalues = " << real_count
                      << "  spectral radius = " << num(rmax) << '\n';
            if (!flags.out.empty()) {
                std::vector<std::vector<std::string>> rows;
                for (Eigen::Index i = 0; i < ev.size(); ++i)
                    rows.push_back({num(ev(i).real(), 17), num(ev(i).imag(), 17)});
                write_csv(flags.out, {"re", "im"}, rows);
            }
            return kExitOk;
        }
        for (const auto& [cmd, e] : exp_cmds) {
            if (!*cmd) continue;
            const ExperimentConfig cfg = resolve_config(e, flags);
            switch (e) {
                case Experiment::clt: {
                    const SummaryStats s = run_clt(cfg);
                    bool ok = true;
                    std::cout << "trials " << s.trials << " (failed " << s.failures << ")\n";
                    for (const auto& f : s.functions) {
                        std::cout << f.name << ": mean " << num(f.mean_re.value) << " +- " << num(f.mean_re.se, 3)
                                  << " (pred " << num(f.predicted_mean.real()) << ", z " << num(f.z_mean, 3)
                                  << "), var " << num(f.variance.value) << " +- " << num(f.variance.se, 3) << " (pred "
                                  << num(f.predicted_variance) << ", z " << num(f.z_variance, 3) << ")";
                        if (f.normal_re) std::cout << ", AD p " << num(f.normal_re->ad_p, 3);
                        std::cout << '\n';
                        ok = ok && std::abs(f.z_mean) <= 3 && std::abs(f.z_variance) <= 4;
                    }
                    write_out(flags.out, "clt_summary", s.to_json(), &cfg);
                    return report(ok);
                }
                case Experiment::universality: {
                    const CorrelationEstimate r = run_universality(cfg);
                    std::cout << "KS vs complex Ginibre " << num(r.ks_distance, 4) << " (p " << num(r.ks_p, 3)
                              << "), control at real z " << num(r.control_ks_distance, 4) << '\n';
                    write_out(flags.out, "universality_summary", r.to_json(), &cfg);
                    return report(r.ks_distance < 0.08 && r.control_ks_distance > 0.15);
                }
                case Experiment::independence: {
                    const CorrelationEstimate r = run_independence(cfg);
                    std::cout << "eta " << num(r.eta, 4) << "  corr " << num(r.correlation, 4)
                              << "  joint-vs-product " << num(r.joint_vs_product, 4) << '\n';
                    write_out(flags.out, "independence_summary", r.to_json(), &cfg);
                    return report(std::abs(r.correlation) < 0.1 && r.joint_vs_product < 0.05);
                }
                case Experiment::dbm_coupling: {
                    const DbmCouplingReport r = run_dbm_coupling(cfg);
                    std::cout << "coupling error by dt:";
                    for (size_t k = 0; k < r.coupling_error.size(); ++k)
                        std::cout << ' ' << num(r.strided_dt[k], 3) << ':' << num(r.coupling_error[k], 3);
                    std::cout << "\nKS regularized vs Ginibre " << num(r.ks_regularized_vs_ginibre, 4) << " (p "
                              << num(r.ks_p, 3) << ")\nmedian n*distance under shared noise "
                              << num(r.median_shared_distance_n, 4) << '\n';
                    write_out(flags.out, "dbm_summary", r.to_json(), &cfg);
                    return report(r.coupling_error_decreasing && r.ks_regularized_vs_ginibre < 0.12);
                }
                case Experiment::girko_check: {
                    const GirkoReport r = run_girko_check(cfg);
                    std::cout << "direct " << cnum(r.direct) << '\n';
                    for (size_t k = 0; k < r.levels.size(); ++k)
                        std::cout << "grid " << r.levels[k] << ": " << cnum(r.girko[k]) << "  residual "
                                  << num(r.relative_residual[k], 3) << '\n';
                    write_out(flags.out, "girko_summary", r.to_json(), &cfg);
                    return report(r.monotone && !r.relative_residual.empty() && r.relative_residual.back() < 1e-2);
                }
                case Experiment::edelman: {
                    const EdelmanReport r = run_edelman(cfg);
                    std::cout << "bins within 3 SE: " << r.bins_within << "/" << r.interior_bins << '\n'
                              << "1/n coefficient at y = " << num(r.y_fit) << ": " << num(r.fitted_coefficient)
                              << " (predicted " << num(r.predicted_coefficient) << ", simulated "
                              << num(r.mc_fitted_coefficient) << " +- " << num(r.mc_fitted_se, 3) << ")\n";
                    write_out(flags.out, "edelman_summary", r.to_json(), &cfg);
                    const double rel =
                        std::abs(r.fitted_coefficient - r.predicted_coefficient) / std::abs(r.predicted_coefficient);
                    return report(r.fraction_within >= 0.9 && rel <= 0.5);
                }
                case Experiment::overlaps: {
                    const OverlapReport r = run_overlaps(cfg);
                    for (size_t k = 0; k < r.n_values.size(); ++k)
                        std::cout << "n " << r.n_values[k] << ": median max overlap " << num(r.median_max_overlap[k], 4)
                                  << '\n';
                    write_out(flags.out, "overlaps_summary", r.to_json(), &cfg);
                    return report(r.strictly_decreasing);
                }
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::config_error ? kExitConfig : kExitFail;
    }
    return kExitOk;
}

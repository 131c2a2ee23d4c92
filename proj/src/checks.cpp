#include "sclt/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/special_functions/binomial.hpp>

#include "sclt/cltpred.hpp"
#include "sclt/dbm.hpp"
#include "sclt/mde.hpp"
#include "sclt/stability.hpp"

namespace sclt {

namespace {

CheckResult make(const std::string& name, double measured, double tol, std::string detail = {}) {
    return {name, measured <= tol, measured, tol, std::move(detail)};
}

cplx random_in_disk(std::mt19937_64& g, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    for (;;) {
        const cplx z(u(g), u(g));
        if (std::abs(z) <= r) return z;
    }
}

double log_uniform(std::mt19937_64& g, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(g));
}

// min over pairings of max |a_i - b_pi(i)|
double multiset_distance(std::array<cplx, 4> a, const std::array<cplx, 4>& b) {
    std::array<int, 4> p{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do {
        double d = 0.0;
        for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - b[p[i]]));
        best = std::min(best, d);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

std::vector<CheckResult> check_mde(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::vector<CheckResult> out;
    double worst = 0.0;
    std::uniform_real_distribution<double> E(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const cplx z = random_in_disk(g, 1.5);
        const cplx w(E(g), log_uniform(g, 1e-3, 10.0));
        worst = std::max(worst, solve_m(z, w).residual());
    }
    out.push_back(make("mde residual on 1000 random (z,w)", worst, 1e-12));

    worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const cplx z = random_in_disk(g, 0.95);
        worst = std::max(worst, std::abs(density(z, 0.0) - std::sqrt(1.0 - std::norm(z)) / kPi));
    }
    out.push_back(make("rho^z(0) = sqrt(1-|z|^2)/pi at 10 points", worst, 1e-8));

    worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const cplx z = random_in_disk(g, 0.95);
        worst = std::max(worst, std::abs(solve_m(z, cplx(0.0, 1e-6)).mubound() - 1.0));
    }
    out.push_back(make("|m|^2 + |u|^2|z|^2 -> 1 at eta = 1e-6", worst, 1e-4));
    return out;
}

std::vector<CheckResult> check_stability(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> E(-1.2, 1.2), eta(1e-3, 1.0);
    auto random_w = [&] {
        for (;;) {
            const cplx w(E(g), eta(g));
            if (std::abs(w) <= 1.2) return w;
        }
    };
    std::vector<CheckResult> out;

    double eig_err = 0.0, trivial_err = 0.0, norm_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const MdeSolution s = solve_m(random_in_disk(g, 1.2), random_w());
        const StabilityOperator B = build_B(s);
        const SingleShiftSpectrum sp = single_shift_spectrum(s);
        eig_err = std::max(eig_err, (B.apply(sp.E_minus) - sp.eig_E_minus * sp.E_minus).norm());
        eig_err = std::max(eig_err, (B.apply(sp.V_r) - sp.eig_V * sp.V_r).norm());
        eig_err = std::max(eig_err, (B.apply_adjoint(sp.V_l) - std::conj(sp.eig_V) * sp.V_l).norm());
        norm_err = std::max(norm_err, std::abs(trace_inner(sp.V_l, sp.V_r) - 1.0));
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(B.matrix, false);
        std::array<cplx, 4> got;
        for (int i = 0; i < 4; ++i) got[i] = es.eigenvalues()(i);
        trivial_err = std::max(trivial_err, multiset_distance(got, {1.0, 1.0, sp.eig_E_minus, sp.eig_V}));
    }
    out.push_back(make("B eigenvector residuals (E_-, V_r, V_l)", eig_err, 1e-10));
    out.push_back(make("<V_l, V_r> = 1", norm_err, 1e-10));
    out.push_back(make("spectrum of B = {1, 1, 1+m^2-u^2|z|^2, 1-m^2-u^2|z|^2}", trivial_err, 1e-10));

    double pair_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const MdeSolution s1 = solve_m(random_in_disk(g, 1.2), random_w());
        const MdeSolution s2 = solve_m(random_in_disk(g, 1.2), random_w());
        const BetaPair b = betahat_pair(s1, s2);
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(build_Bhat(s1, s2).matrix, false);
        std::array<cplx, 4> got;
        for (int i = 0; i < 4; ++i) got[i] = es.eigenvalues()(i);
        pair_err = std::max(pair_err, multiset_distance(got, {1.0, 1.0, b.beta_hat, b.beta_hat_star}));
    }
    out.push_back(make("beta-hat pair vs 4x4 eigensolve on 1000 pairs", pair_err, 1e-10));

    double min_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
        const MdeSolution s1 = solve_m(random_in_disk(g, 1.2), random_w());
        const MdeSolution s2 = solve_m(random_in_disk(g, 1.2), random_w());
        min_ratio = std::min(min_ratio, beta_lower_bound_ratio(s1, s2));
    }
    CheckResult r{"beta-hat lower-bound ratio over 10^4 points", min_ratio >= 1e-3, min_ratio, 1e-3,
                  "fitted constant " + fmt(min_ratio) + " (must be >= tolerance)"};
    out.push_back(r);
    return out;
}

std::vector<CheckResult> check_closed_forms(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::vector<CheckResult> out;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const cplx z = random_in_disk(g, 1.5);
        const MdeSolution s = solve_m(z, cplx(0.0, log_uniform(g, 1e-3, 10.0)));
        const cplx a = script_E_form_A(s), b = script_E_form_B(s);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    out.push_back(make("two closed forms of the expectation correction", worst, 1e-8));

    worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        cplx z;
        do z = random_in_disk(g, 0.95);
        while (std::abs(z.imag()) < 0.05);
        worst = std::max(worst, std::abs(script_E_eta_integral(z, 1) - script_E_eta_integral_closed(z, 1)));
    }
    out.push_back(make("eta-integral vs -(i/4n)(log 4 + 2 log|y|)", worst, 1e-4));
    return out;
}

std::vector<CheckResult> check_quadrature() {
    std::vector<CheckResult> out;
    double sing = 0.0, arc = 0.0;
    for (int k : {2, 4, 6, 8}) {
        const double c = std::ldexp(boost::math::binomial_coefficient<double>(k - 1, k / 2), -k);
        const ExpectationTerms t = expectation_E(zpow(k), 0.0, 1);
        sing = std::max(sing, std::abs(t.singular - (0.5 - c)));
        arc = std::max(arc, std::abs(t.arcsine - c));
    }
    out.push_back(make("(1/4pi) int_D ((Re z)^k - z^k)/y^2 = 1/2 - 2^-k C(k-1,k/2)", sing, 1e-4));
    out.push_back(make("(1/2pi) int x^k/sqrt(1-x^2) = 2^-k C(k-1,k/2)", arc, 1e-4));

    double err = 0.0;
    for (int k = 1; k <= 8; ++k) {
        const ExpectationTerms t = expectation_E(zpow(k), 0.0, 1);
        const cplx e = t.total() - t.bulk;
        err = std::max(err, std::abs(e - (k % 2 ? 0.0 : 1.0)));
    }
    out.push_back(make("E(z^k) = 1 (k even), 0 (k odd), k <= 8", err, 1e-4));
    return out;
}

std::vector<CheckResult> check_dbm_drift(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0), s(-1.0, 1.0);
    double worst = 0.0, anti = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 15;
        VectorXd x(n);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) x(i) = acc += 0.05 + u(g);
        MatrixXd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) K(i, j) = K(j, i) = s(g);
        const double w = trial % 3 == 0 ? 0.0 : s(g);
        const CorrelationModel m = CorrelationModel::from_kernel(K, 1e300);
        const DbmState st = make_state(x, DbmKind::raw);
        const VectorXd ds = drift_signed(st.signed_particles(), m.signed_lambda(), w);
        const VectorXd de = drift_explicit(x, K, w);
        const double scale = std::max(1.0, de.cwiseAbs().maxCoeff());
        worst = std::max(worst, (ds.tail(n) - de).cwiseAbs().maxCoeff() / scale);
        anti = std::max(anti, (ds.head(n).reverse() + ds.tail(n)).cwiseAbs().maxCoeff() / scale);
    }
    return {make("signed vs explicit DBM drift", worst, 1e-12),
            make("signed drift is odd under x -> -x", anti, 1e-12)};
}

std::vector<CheckResult> run_selftest() {
    std::vector<CheckResult> all;
    for (auto part : {check_mde(), check_stability(), check_closed_forms(), check_quadrature(), check_dbm_drift()})
        all.insert(all.end(), part.begin(), part.end());
    return all;
}

}  // namespace sclt

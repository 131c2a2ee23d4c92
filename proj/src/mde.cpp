#include "sclt/mde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace sclt {

namespace {

// m^3 + 2w m^2 + (w^2 + 1 - |z|^2) m + w
cplx cubic(cplx m, cplx w, double a) { return ((m + 2.0 * w) * m + (w * w + 1.0 - a)) * m + w; }
cplx cubic_dm(cplx m, cplx w, double a) { return 3.0 * m * m + 4.0 * w * m + w * w + 1.0 - a; }

double mde_residual(cplx m, cplx w, double a) {
    return std::abs(1.0 / m + w + m - a / (w + m));
}

cplx newton_polish(cplx m, cplx w, double a) {
    double best = mde_residual(m, w, a);
    for (int it = 0; it < 4; ++it) {
        const cplx d = cubic_dm(m, w, a);
        if (d == cplx(0.0)) break;
        const cplx cand = m - cubic(m, w, a) / d;
        const double r = mde_residual(cand, w, a);
        if (!(r < best)) break;
        best = r;
        m = cand;
    }
    return m;
}

// Homotopy in eta from far above the spectrum, where m ~ -1/w is the only
// admissible root, down to the requested w.
cplx continuation_root(cplx w, double a) {
    const double sgn = w.imag() > 0 ? 1.0 : -1.0;
    const double target = std::abs(w.imag());
    double eta = std::max(10.0, 10.0 * std::abs(w));
    cplx wk(w.real(), sgn * eta);
    cplx m = -1.0 / wk;
    while (true) {
        for (int it = 0; it < 100; ++it) {
            const cplx step = cubic(m, wk, a) / cubic_dm(m, wk, a);
            double damp = 1.0;
            cplx cand = m - step;
            // damping keeps the iterate in the correct half plane
            while (cand.imag() * sgn <= 0.0 && damp > 1e-6) {
                damp *= 0.5;
                cand = m - damp * step;
            }
            m = cand;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(m))) break;
        }
        if (eta <= target) break;
        eta = std::max(target, eta * 0.8);
        wk = cplx(w.real(), sgn * eta);
    }
    return m;
}

MdeSolution assemble(cplx z, cplx w, cplx m, cplx u) {
    MdeSolution s;
    s.z = z;
    s.w = w;
    s.m = m;
    s.u = u;
    s.rho = std::abs(m.imag()) / kPi;
    s.M << m, -z * u, -std::conj(z) * u, m;
    return s;
}

}  // namespace

double MdeSolution::residual() const { return mde_residual(m, w, std::norm(z)); }

MdeSolution solve_m(cplx z, cplx w) {
    require(w.imag() != 0.0, ErrorCode::invalid_argument,
            "solve_m needs Im w != 0; use solve_m_real_axis for the boundary value");
    const double a = std::norm(z);
    Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
    comp(0, 0) = -2.0 * w;
    comp(0, 1) = -(w * w + 1.0 - a);
    comp(0, 2) = -w;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp, false);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "companion eigensolve failed");

    const double sgn = w.imag() > 0 ? 1.0 : -1.0;
    std::array<cplx, 3> cand{};
    int nc = 0;
    for (int k = 0; k < 3; ++k) {
        const cplx r = es.eigenvalues()(k);
        if (r.imag() * sgn > 0.0) cand[nc++] = r;
    }
    cplx m;
    bool chosen = false;
    if (nc == 1 && std::abs(cand[0].imag()) > 1e-14) {
        m = cand[0];
        chosen = true;
    } else if (nc > 1) {
        int good = -1, count = 0;
        for (int k = 0; k < nc; ++k) {
            const cplx u = cand[k] / (w + cand[k]);
            if (std::norm(cand[k]) + std::norm(u) * a < 1.0 && std::abs(cand[k].imag()) > 1e-14) {
                good = k;
                ++count;
            }
        }
        if (count == 1) {
            m = cand[good];
            chosen = true;
        }
    }
    if (!chosen) m = continuation_root(w, a);
    m = newton_polish(m, w, a);
    require(m.imag() * sgn > 0.0, ErrorCode::branch_selection,
            "no root of the Dyson cubic with Im m * Im w > 0");
    return assemble(z, w, m, m / (w + m));
}

MdeSolution solve_m_real_axis(cplx z, double E) {
    static constexpr std::array<double, 3> etas{1e-7, 1e-8, 1e-9};
    cplx m0(0.0), u0(0.0);
    for (int k = 0; k < 3; ++k) {
        double L = 1.0;
        for (int j = 0; j < 3; ++j)
            if (j != k) L *= etas[j] / (etas[j] - etas[k]);
        const MdeSolution s = solve_m(z, cplx(E, etas[k]));
        m0 += L * s.m;
        u0 += L * s.u;
    }
    if (m0.imag() < 0.0) m0.imag(0.0);
    MdeSolution out = assemble(z, cplx(E, 0.0), m0, u0);
    out.rho = std::max(0.0, m0.imag()) / kPi;
    return out;
}

double density(cplx z, double E) { return solve_m_real_axis(z, std::abs(E)).rho; }

EtaDerivatives m_eta_derivatives(const MdeSolution& sol) {
    const double a = std::norm(sol.z);
    const cplx m = sol.m, w = sol.w;
    const cplx Pm = cubic_dm(m, w, a);
    const cplx Pw = 2.0 * m * m + 2.0 * w * m + 1.0;
    if (std::abs(Pm) < 1e-14 * (1.0 + std::abs(Pw))) {
        const cplx stab = 1.0 - m * m - sol.u * sol.u * a;
        throw Error(ErrorCode::singular_operator,
                    "implicit differentiation degenerate; 1 - m^2 - u^2|z|^2 = " +
                        std::to_string(stab.real()) + (stab.imag() >= 0 ? "+" : "") +
                        std::to_string(stab.imag()) + "i");
    }
    const cplx dm_dw = -Pw / Pm;
    const cplx du_dw = (dm_dw * w - m) / ((w + m) * (w + m));
    const cplx I(0.0, 1.0);
    return {I * dm_dw, I * du_dw};
}

EdgeData edges(cplx z) {
    EdgeData e;
    e.z = z;
    const double a = std::norm(z);
    if (a == 0.0) {
        e.e_plus = 4.0;
        e.semicircle_limit = true;
        return e;
    }
    if (a < 1e-6) {
        // series of the closed form; the direct formula cancels catastrophically
        e.e_plus = 4.0 + 4.0 * a;
        return e;
    }
    const double b = 1.0 - a;
    const double r = std::pow(1.0 + 8.0 * a, 1.5);
    e.e_plus = (8.0 * b * b + r - 36.0 * b + 27.0) / (8.0 * a);
    if (a > 1.0) e.e_minus = (8.0 * b * b - r - 36.0 * b + 27.0) / (8.0 * a);
    return e;
}

namespace {

double integrate_rho(cplx z, double lo, double hi) {
    if (hi <= lo) return 0.0;
    auto f = [&](double x) { return density(z, x); };
    // tanh-sinh copes with the square-root vanishing at the support edges
    static boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, lo, hi, 1e-12);
}

// Short interval away from the support edges, where rho is smooth.
double integrate_rho_smooth(cplx z, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return boost::math::quadrature::gauss<double, 10>::integrate([&](double x) { return density(z, x); }, lo, hi);
}

struct Support {
    double lo, hi;
};

Support support_of(cplx z) {
    const EdgeData e = edges(z);
    Support s{0.0, std::sqrt(e.e_plus)};
    if (e.e_minus && *e.e_minus > 0.0) s.lo = std::sqrt(*e.e_minus);
    return s;
}

}  // namespace

double cumulative_density(cplx z, double x) {
    const Support s = support_of(z);
    x = std::abs(x);
    return integrate_rho(z, s.lo, std::min(x, s.hi));
}

double Quantiles::gamma(int i) const {
    require(i != 0 && std::abs(i) <= static_cast<int>(gamma_pos.size()), ErrorCode::invalid_argument,
            "quantile index out of range");
    return i > 0 ? gamma_pos[i - 1] : -gamma_pos[-i - 1];
}

Quantiles quantiles(cplx z, int n) {
    require(n >= 2, ErrorCode::invalid_argument, "quantiles need n >= 2");
    require(std::abs(std::abs(z) - 1.0) >= 1e-3, ErrorCode::unsupported_regime,
            "quantiles are not supported within 1e-3 of |z| = 1");
    const Support s = support_of(z);
    const int panels = std::clamp(n / 4, 64, 4096);
    std::vector<double> xs(panels + 1), cum(panels + 1, 0.0);
    for (int k = 0; k <= panels; ++k) xs[k] = s.lo + (s.hi - s.lo) * k / panels;
    const bool inner_edge = s.lo > 0.0;
    auto panel_integral = [&](int k, double a, double b) {
        const bool edge = k == panels - 1 || (k == 0 && inner_edge);
        return edge ? integrate_rho(z, a, b) : integrate_rho_smooth(z, a, b);
    };
    for (int k = 0; k < panels; ++k) cum[k + 1] = cum[k] + panel_integral(k, xs[k], xs[k + 1]);

    Quantiles q;
    q.z = z;
    q.n = n;
    q.gamma_pos.resize(n);
    int k = 0;
    for (int i = 1; i <= n; ++i) {
        const double target = static_cast<double>(i) / (2.0 * n);
        if (i == n) {
            q.gamma_pos[i - 1] = s.hi;
            continue;
        }
        while (k < panels - 1 && cum[k + 1] <= target) ++k;
        double lo = xs[k], hi = xs[k + 1];
        double x = lo + (hi - lo) * std::clamp((target - cum[k]) / std::max(cum[k + 1] - cum[k], 1e-300), 0.0, 1.0);
        // safeguarded Newton on F(x) = cum[k] + int_{xs[k]}^x rho - target
        for (int it = 0; it < 60; ++it) {
            const double F = cum[k] + panel_integral(k, xs[k], x) - target;
            if (std::abs(F) < 1e-14) break;
            if (F > 0) hi = x; else lo = x;
            const double d = density(z, x);
            double nx = d > 0 ? x - F / d : 0.5 * (lo + hi);
            if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
            if (std::abs(nx - x) < 1e-15 * (1.0 + x)) {
                x = nx;
                break;
            }
            x = nx;
        }
        q.gamma_pos[i - 1] = x;
    }
    return q;
}

double flow_density(cplx z, double t, double x) {
    require(t >= 0.0, ErrorCode::invalid_argument, "flow time must be nonnegative");
    const double s = std::sqrt(1.0 + t);
    return density(z / s, x / s) / s;
}

void write_density_csv(cplx z, double t, double x_max, int points, const std::string& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot open " + path);
    out << "x,rho\r\n";
    out.precision(17);
    for (int k = 0; k < points; ++k) {
        const double x = x_max * k / std::max(1, points - 1);
        out << x << ',' << flow_density(z, t, x) << "\r\n";
    }
}

}  // namespace sclt

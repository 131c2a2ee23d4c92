#include "sclt/cltpred.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>

#include <boost/math/special_functions/gamma.hpp>
#include <gsl/gsl_integration.h>

#include "sclt/spectral.hpp"

namespace sclt {

namespace {

struct GaussLegendre {
    std::vector<double> x, w;  // on (0, 1)
};

const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<size_t>(n));
    require(t != nullptr, ErrorCode::quadrature_failure, "cannot build Gauss-Legendre table");
    GaussLegendre gl;
    gl.x.resize(n);
    gl.w.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(0.0, 1.0, static_cast<size_t>(i), &gl.x[i], &gl.w[i], t);
    gsl_integration_glfixed_table_free(t);
    return cache.emplace(n, std::move(gl)).first->second;
}

// int_D g(z) d^2z over the polar tensor grid.
template <class G>
cplx polar_integral(G&& g, int n_radial, int n_angular) {
    const GaussLegendre& gl = gauss_legendre(n_radial);
    const double dth = 2.0 * kPi / n_angular;
    cplx acc = 0.0;
    for (int i = 0; i < n_radial; ++i) {
        const double r = gl.x[i];
        cplx ring = 0.0;
        for (int j = 0; j < n_angular; ++j) ring += g(std::polar(r, j * dth));
        acc += gl.w[i] * r * dth * ring;
    }
    return acc;
}

TestFunction conj_function(const TestFunction& f) {
    TestFunction g = f;
    g.name = "conj(" + f.name + ")";
    g.value = [f](cplx z) { return std::conj(f.value(z)); };
    if (f.grad) {
        g.grad = [f](cplx z) -> TestFunction::Grad {
            const auto d = f.grad(z);
            return {std::conj(d[0]), std::conj(d[1])};
        };
    }
    if (f.laplacian) g.laplacian = [f](cplx z) { return std::conj(f.laplacian(z)); };
    if (g.hint == Smoothness::analytic) g.hint = Smoothness::C2;
    return g;
}

// (1/2pi) int_{-1}^1 f(x)/sqrt(1-x^2) dx = (1/2pi) int_0^pi f(cos phi) dphi
cplx arcsine_term(const TestFunction& f) {
    const int M = 1024;
    const double h = kPi / M;
    cplx acc = 0.5 * (f(1.0) + f(-1.0));
    for (int j = 1; j < M; ++j) acc += f(std::cos(j * h));
    return acc * h / (2.0 * kPi);
}

cplx singular_integrand(const TestFunction& f, cplx z) {
    const double x = z.real(), y = z.imag();
    if (std::abs(y) < 1e-3) {
        const double h = 1e-3;
        const cplx fyy = (f(cplx(x, h)) + f(cplx(x, -h)) - 2.0 * f(x)) / (h * h);
        return -0.5 * fyy;
    }
    const cplx psym = 0.5 * (f(z) + f(std::conj(z)));
    return (f(x) - psym) / (y * y);
}

}  // namespace

BoundaryFourier boundary_fourier(const TestFunction& f, int K, int N) {
    require(K >= 1 && N > 2 * K, ErrorCode::invalid_argument, "boundary_fourier needs N > 2K");
    BoundaryFourier b;
    b.K = K;
    b.N = N;
    std::vector<cplx> h(N), tw(N);
    for (int j = 0; j < N; ++j) {
        const double th = 2.0 * kPi * j / N;
        h[j] = f(std::polar(1.0, th));
        tw[j] = std::polar(1.0, -th);
    }
    b.coeffs.assign(2 * K + 1, 0.0);
    for (int k = -K; k <= K; ++k) {
        cplx acc = 0.0;
        const long long kk = ((k % N) + N) % N;
        for (int j = 0; j < N; ++j) acc += h[j] * tw[(kk * j) % N];
        b.coeffs[k + K] = acc / static_cast<double>(N);
    }
    return b;
}

InnerProduct h_half_inner(const TestFunction& g, const TestFunction& f, int K, int N) {
    const BoundaryFourier gb = boundary_fourier(g, K, N);
    const BoundaryFourier fb = &f == &g ? gb : boundary_fourier(f, K, N);
    InnerProduct r;
    cplx head = 0.0, tail = 0.0;
    for (int k = -K; k <= K; ++k) {
        const cplx term = static_cast<double>(std::abs(k)) * std::conj(gb.at(k)) * fb.at(k);
        (std::abs(k) <= K / 2 ? head : tail) += term;
    }
    r.value = head + tail;
    r.tail = std::abs(tail);
    r.tail_flag = r.tail > 1e-4 * std::abs(head) && r.tail > 1e-14;
    return r;
}

InnerProduct grad_inner(const TestFunction& g, const TestFunction& f, int n_radial, int n_angular) {
    auto integrand = [&](cplx z) {
        const auto a = g.gradient(z);
        const auto b = f.gradient(z);
        return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
    };
    InnerProduct r;
    r.value = polar_integral(integrand, n_radial, n_angular);
    const cplx coarse = polar_integral(integrand, n_radial / 2, n_angular / 2);
    r.tail = std::abs(r.value - coarse);
    r.used_fd = g.gradient_is_fd() || f.gradient_is_fd();
    // relative to int |conj(grad g) . grad f|, which stays meaningful when the value cancels
    const double scale = polar_integral([&](cplx z) { return cplx(std::abs(integrand(z))); }, n_radial, n_angular).real();
    require(r.tail <= 1e-6 * std::max(scale, 1e-12), ErrorCode::quadrature_failure,
            "gradient quadrature did not converge under refinement (change " + std::to_string(r.tail) + ")");
    return r;
}

cplx disk_integral(const TestFunction& f, int n_radial, int n_angular) {
    return polar_integral([&](cplx z) { return f(z); }, n_radial, n_angular);
}

cplx disk_average(const TestFunction& f) { return disk_integral(f) / kPi; }

cplx boundary_average(const TestFunction& f) {
    const int N = 4096;
    cplx acc = 0.0;
    for (int j = 0; j < N; ++j) acc += f(std::polar(1.0, 2.0 * kPi * j / N));
    return acc / static_cast<double>(N);
}

ExpectationTerms expectation_E(const TestFunction& f, double kappa4, int n) {
    require(n >= 1, ErrorCode::invalid_argument, "n must be positive");
    ExpectationTerms t;
    t.bulk = static_cast<double>(n) * disk_average(f);
    t.singular = polar_integral([&](cplx z) { return singular_integrand(f, z); }, 256, 512) / (4.0 * kPi);
    t.kappa4 = kappa4 == 0.0
                   ? cplx(0.0)
                   : -kappa4 / kPi * polar_integral([&](cplx z) { return f(z) * (2.0 * std::norm(z) - 1.0); }, 256, 512);
    t.boundary = -boundary_average(f);
    t.arcsine = arcsine_term(f);
    t.endpoint = 0.25 * (f(1.0) + f(-1.0));
    return t;
}

CovarianceTerms covariance_C(const TestFunction& g, const TestFunction& f, double kappa4) {
    const TestFunction pg = psym(g), pf = psym(f);
    CovarianceTerms c;
    const InnerProduct gi = grad_inner(pg, pf);
    const InnerProduct hi = h_half_inner(pg, pf);
    c.gradient = gi.value / (2.0 * kPi);
    c.h_half = hi.value;
    c.tail_flag = hi.tail_flag;
    c.used_fd = gi.used_fd;
    if (kappa4 != 0.0) {
        const cplx dg = disk_average(g) - boundary_average(g);
        const cplx df = disk_average(f) - boundary_average(f);
        c.kappa4 = kappa4 * std::conj(dg) * df;
    }
    return c;
}

double variance_V(const TestFunction& f, double kappa4) { return covariance_C(f, f, kappa4).total().real(); }

double complex_V1(const TestFunction& f) {
    return grad_inner(f, f).value.real() / (4.0 * kPi) + 0.5 * h_half_inner(f, f).value.real();
}

double complex_V2(const TestFunction& f) { return std::norm(disk_average(f) - boundary_average(f)); }

double analytic_dirichlet(const TestFunction& f) {
    return polar_integral([&](cplx z) { return cplx(std::norm(f.dz(z))); }, 256, 512).real() / kPi;
}

namespace {
nlohmann::json cjson(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }
}  // namespace

nlohmann::json PredictedMoments::to_json() const {
    nlohmann::json j;
    j["function"] = function;
    j["n"] = n;
    j["kappa4"] = kappa4;
    j["E_f"] = cjson(E_f);
    j["V_f"] = V_f;
    j["C_conjf_f"] = cjson(C_gf);
    j["expectation_terms"] = {{"bulk", cjson(e_terms.bulk)},         {"singular", cjson(e_terms.singular)},
                              {"kappa4", cjson(e_terms.kappa4)},     {"boundary", cjson(e_terms.boundary)},
                              {"arcsine", cjson(e_terms.arcsine)},   {"endpoint", cjson(e_terms.endpoint)}};
    j["variance_terms"] = {{"gradient", cjson(c_terms.gradient)},
                           {"h_half", cjson(c_terms.h_half)},
                           {"kappa4", cjson(c_terms.kappa4)},
                           {"h_half_tail_flag", c_terms.tail_flag},
                           {"finite_difference_gradient", c_terms.used_fd}};
    return j;
}

PredictedMoments predict(const TestFunction& f, double kappa4, int n) {
    PredictedMoments p;
    p.function = f.name;
    p.kappa4 = kappa4;
    p.n = n;
    p.e_terms = expectation_E(f, kappa4, n);
    p.E_f = p.e_terms.total();
    p.c_terms = covariance_C(f, f, kappa4);
    p.V_f = p.c_terms.total().real();
    p.C_gf = covariance_C(conj_function(f), f, kappa4).total();
    return p;
}

GirkoResult girko_evaluate(const MatrixXcd& X, const TestFunction& f, GirkoSplit split, GirkoGrid grid) {
    const int n = static_cast<int>(X.rows());
    require(X.rows() == X.cols() && n >= 1, ErrorCode::dimension_mismatch, "girko_evaluate needs a square matrix");
    require(std::isfinite(f.support_radius), ErrorCode::invalid_argument,
            "girko_evaluate needs a test function with bounded support");
    require(grid.intervals >= 4 && grid.intervals % 2 == 0, ErrorCode::invalid_argument,
            "z-grid interval count must be even and >= 4");
    if (split.eta0 <= 0.0) split.eta0 = std::pow(static_cast<double>(n), -1.1);
    if (split.eta_c <= 0.0) split.eta_c = std::pow(static_cast<double>(n), -0.9);
    require(split.eta0 < split.eta_c && split.eta_c < split.T, ErrorCode::invalid_argument,
            "eta split must satisfy eta0 < eta_c < T");

    const int N = grid.intervals;
    const double R = f.support_radius;
    const cplx c0 = f.support_center;
    const double h = 2.0 * R / N;
    const double e0 = split.eta0 * split.eta0, ec = split.eta_c * split.eta_c, T2 = split.T * split.T;

    GirkoResult res;
    res.split = split;
    cplx coarse = 0.0;
    for (int a = 0; a <= N; ++a) {
        const double wa = (a == 0 || a == N) ? 0.5 : 1.0;
        for (int b = 0; b <= N; ++b) {
            const double wb = (b == 0 || b == N) ? 0.5 : 1.0;
            const cplx z = c0 + cplx(-R + a * h, -R + b * h);
            const cplx lap = f.lap(z);
            if (lap == cplx(0.0)) continue;
            const VectorXd s = singular_values(X, z);
            double jt = 0.0, il = 0.0, im = 0.0, it = 0.0;
            for (Eigen::Index k = 0; k < s.size(); ++k) {
                const double s2 = std::max(s(k) * s(k), 1e-300);
                const double l1 = std::log1p(s2 / T2);
                const double l0 = std::log(s2 + e0), lc = std::log(s2 + ec);
                jt += l1;
                il += l0 - std::log(s2);
                im += lc - l0;
                it += l1 - lc;
            }
            const cplx wl = lap * (wa * wb * h * h / (4.0 * kPi));
            res.J_T += wl * jt;
            res.I_low += wl * il;
            res.I_mid += wl * im;
            res.I_top += wl * it;
            ++res.evaluated_points;
            if (a % 2 == 0 && b % 2 == 0) {
                const double ca = (a == 0 || a == N) ? 0.5 : 1.0, cb = (b == 0 || b == N) ? 0.5 : 1.0;
                coarse += lap * (ca * cb * 4.0 * h * h / (4.0 * kPi)) * (jt - il - im - it);
            }
        }
    }
    res.value = res.J_T - res.I_low - res.I_mid - res.I_top;
    res.error_estimate = std::abs(res.value - coarse);
    if (grid.tolerance > 0.0)
        require(res.error_estimate <= grid.tolerance, ErrorCode::quadrature_failure,
                "z-grid too coarse: estimated error " + std::to_string(res.error_estimate));
    return res;
}

double edelman_density(cplx z, int n) {
    require(n >= 2, ErrorCode::invalid_argument, "edelman_density needs n >= 2");
    const double y = std::abs(z.imag());
    require(y > 0.0, ErrorCode::invalid_argument, "edelman_density is defined off the real axis");
    const double t = std::sqrt(2.0 * n) * y;
    double erfcx;
    if (t > 20.0) {
        const double t2 = 1.0 / (t * t);
        erfcx = (1.0 - 0.5 * t2 + 0.75 * t2 * t2 - 1.875 * t2 * t2 * t2 + 6.5625 * t2 * t2 * t2 * t2) /
                (t * std::sqrt(kPi));
    } else {
        erfcx = std::exp(t * t) * std::erfc(t);
    }
    const double q = boost::math::gamma_q(static_cast<double>(n - 1), n * std::norm(z));
    return std::sqrt(2.0 * n / kPi) * y * erfcx * q;
}

void write_edelman_csv(int n, double y_min, double y_max, double x, int points, const std::string& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot open " + path);
    out.precision(17);
    out << "x,y,rho\r\n";
    for (int i = 0; i < points; ++i) {
        const double y = points == 1 ? y_min : y_min + (y_max - y_min) * i / (points - 1);
        out << x << ',' << y << ',' << edelman_density(cplx(x, y), n) << "\r\n";
    }
}

}  // namespace sclt

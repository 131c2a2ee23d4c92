#include "sclt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sclt {

double mean(const std::vector<double>& x) {
    require(!x.empty(), ErrorCode::degenerate_sample, "mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
    require(x.size() >= 2, ErrorCode::degenerate_sample, "variance needs two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

namespace {
double central_moment(const std::vector<double>& x, int k) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += std::pow(v - m, k);
    return s / static_cast<double>(x.size());
}
}  // namespace

double skewness(const std::vector<double>& x) {
    const double m2 = central_moment(x, 2);
    require(m2 > 0.0, ErrorCode::degenerate_sample, "skewness of a constant sample");
    return central_moment(x, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(const std::vector<double>& x) {
    const double m2 = central_moment(x, 2);
    require(m2 > 0.0, ErrorCode::degenerate_sample, "kurtosis of a constant sample");
    return central_moment(x, 4) / (m2 * m2) - 3.0;
}

double naive_se(const std::vector<double>& x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

Estimate batch_mean(const std::vector<double>& x, int batches) {
    const int n = static_cast<int>(x.size());
    require(batches >= 2 && n >= 2 * batches, ErrorCode::degenerate_sample, "too few samples for batch means");
    const int len = n / batches;
    std::vector<double> bm(batches);
    for (int b = 0; b < batches; ++b)
        bm[b] = std::accumulate(x.begin() + b * len, x.begin() + (b + 1) * len, 0.0) / len;
    Estimate e;
    e.value = mean(x);
    e.se = std::sqrt(variance(bm) / batches);
    return e;
}

Estimate batch_variance(const std::vector<double>& x, int batches) {
    const double m = mean(x);
    const double n = static_cast<double>(x.size());
    std::vector<double> sq(x.size());
    for (size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - m) * (x[i] - m) * n / (n - 1.0);
    Estimate e = batch_mean(sq, batches);
    e.value = variance(x);
    return e;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, ErrorCode::dimension_mismatch, "pearson needs paired samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    require(saa > 0 && sbb > 0, ErrorCode::degenerate_sample, "pearson of a constant sample");
    return sab / std::sqrt(saa * sbb);
}

MatrixXd covariance_matrix(const MatrixXd& samples) {
    require(samples.rows() >= 2, ErrorCode::degenerate_sample, "covariance needs two rows");
    const MatrixXd c = samples.rowwise() - samples.colwise().mean();
    return (c.transpose() * c) / static_cast<double>(samples.rows() - 1);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

NormalityResult normality_test(const std::vector<double>& samples, int min_samples) {
    const int n = static_cast<int>(samples.size());
    require(n >= min_samples, ErrorCode::degenerate_sample,
            "normality test needs at least " + std::to_string(min_samples) + " samples");
    const double m = mean(samples);
    const double sd = std::sqrt(variance(samples));
    require(sd > 0.0 && std::isfinite(sd), ErrorCode::degenerate_sample, "normality test on a constant sample");
    std::vector<double> z(samples);
    for (double& v : z) v = (v - m) / sd;
    std::sort(z.begin(), z.end());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lo = std::max(normal_cdf(z[i]), 1e-300);
        const double hi = std::max(1.0 - normal_cdf(z[n - 1 - i]), 1e-300);
        s += (2.0 * i + 1.0) * (std::log(lo) + std::log(hi));
    }
    NormalityResult r;
    r.n = n;
    r.anderson_darling = -n - s / n;
    // Stephens' correction for estimated parameters and the D'Agostino-Stephens p-value table.
    const double a = r.anderson_darling * (1.0 + 0.75 / n + 2.25 / (static_cast<double>(n) * n));
    if (a >= 0.6)
        r.ad_p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
    else if (a >= 0.34)
        r.ad_p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
    else if (a >= 0.2)
        r.ad_p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
    else
        r.ad_p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
    r.ad_p = std::clamp(r.ad_p, 0.0, 1.0);
    r.skew = skewness(samples);
    r.kurt = excess_kurtosis(samples);
    r.jarque_bera = n / 6.0 * (r.skew * r.skew + 0.25 * r.kurt * r.kurt);
    r.jb_p = std::exp(-0.5 * r.jarque_bera);  // chi^2_2 tail
    return r;
}

double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double t = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 1.0 : -1.0) * t;
        if (t < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    require(!a.empty() && !b.empty(), ErrorCode::degenerate_sample, "KS needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double D = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        D = std::max(D, std::abs(i / na - j / nb));
    }
    KsResult r;
    r.D = D;
    const double ne = na * nb / (na + nb);
    r.p = kolmogorov_q((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * D);
    return r;
}

std::vector<double> quantile_edges(std::vector<double> x, int bins) {
    require(bins >= 1 && static_cast<int>(x.size()) >= bins, ErrorCode::degenerate_sample, "too few samples for bins");
    std::sort(x.begin(), x.end());
    std::vector<double> e(bins + 1);
    e[0] = -std::numeric_limits<double>::infinity();
    e[bins] = std::numeric_limits<double>::infinity();
    for (int k = 1; k < bins; ++k) {
        const double pos = static_cast<double>(k) * x.size() / bins;
        const size_t lo = static_cast<size_t>(std::floor(pos));
        e[k] = lo == 0 ? x[0] : 0.5 * (x[lo - 1] + x[std::min(lo, x.size() - 1)]);
    }
    return e;
}

int bin_index(const std::vector<double>& edges, double v) {
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    return static_cast<int>(it - edges.begin()) - 1;
}

double joint_vs_product_distance(const std::vector<double>& a, const std::vector<double>& b, int bins) {
    require(a.size() == b.size(), ErrorCode::dimension_mismatch, "joint histogram needs paired samples");
    const auto ea = quantile_edges(a, bins), eb = quantile_edges(b, bins);
    MatrixXd joint = MatrixXd::Zero(bins, bins);
    VectorXd pa = VectorXd::Zero(bins), pb = VectorXd::Zero(bins);
    const double w = 1.0 / static_cast<double>(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        const int ia = bin_index(ea, a[i]), ib = bin_index(eb, b[i]);
        joint(ia, ib) += w;
        pa(ia) += w;
        pb(ib) += w;
    }
    return (joint - pa * pb.transpose()).cwiseAbs().maxCoeff();
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::dimension_mismatch, "linear fit needs paired data");
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    require(sxx > 0, ErrorCode::degenerate_sample, "linear fit with constant abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace sclt

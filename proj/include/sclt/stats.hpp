#pragma once

#include <vector>

#include "sclt/common.hpp"

namespace sclt {

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);  // unbiased
double skewness(const std::vector<double>& x);
double excess_kurtosis(const std::vector<double>& x);
double naive_se(const std::vector<double>& x);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    double z(double predicted) const { return se > 0 ? (value - predicted) / se : 0.0; }
};

// Mean with a batch-means standard error.
Estimate batch_mean(const std::vector<double>& x, int batches = 20);
// Unbiased variance with a batch-means standard error on the squared deviations.
Estimate batch_variance(const std::vector<double>& x, int batches = 20);

double pearson(const std::vector<double>& a, const std::vector<double>& b);
// Sample covariance matrix, columns are variables.
MatrixXd covariance_matrix(const MatrixXd& samples);

double normal_cdf(double x);

struct NormalityResult {
    int n = 0;
    double anderson_darling = 0.0;  // A^2 after standardizing by sample mean/sd
    double ad_p = 0.0;
    double skew = 0.0;
    double kurt = 0.0;
    double jarque_bera = 0.0;
    double jb_p = 0.0;
};

// Anderson-Darling (estimated mean and variance) and Jarque-Bera tests.
// Requires at least min_samples values and nonzero spread.
NormalityResult normality_test(const std::vector<double>& samples, int min_samples = 500);

struct KsResult {
    double D = 0.0;
    double p = 0.0;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

// Equal-mass bin edges (bins+1 values) from sample quantiles.
std::vector<double> quantile_edges(std::vector<double> x, int bins);
int bin_index(const std::vector<double>& edges, double v);

// sup |P(joint bin) - P(a bin) P(b bin)| over a bins x bins grid of quantile bins.
double joint_vs_product_distance(const std::vector<double>& a, const std::vector<double>& b, int bins = 8);

// Least squares y = c0 + c1 x.
struct LinearFit {
    double intercept = 0.0, slope = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sclt

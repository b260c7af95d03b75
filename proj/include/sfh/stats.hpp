#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sfh {

// Fixed-order pairwise tree reduction; deterministic across worker counts.
double tree_sum(std::span<const double> x);

double mean(std::span<const double> x);
// unbiased sample variance
double sample_variance(std::span<const double> x);

struct VarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;  // moment-based s.e. of the sample variance
  double ci_lo = 0.0;      // bootstrap percentile CI
  double ci_hi = 0.0;
};
VarianceEstimate variance_with_ci(std::span<const double> x, std::uint64_t seed,
                                  int n_boot = 400);

struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
CovarianceEstimate covariance_with_se(std::span<const double> x, std::span<const double> y);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
SlopeFit ols_fit(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x);

// One-sample Kolmogorov distance of (already standardized) samples to N(0,1).
double ks_distance_normal(std::span<const double> samples);

struct DistanceEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};
DistanceEstimate ks_with_ci(std::span<const double> samples, std::uint64_t seed,
                            int n_boot = 200);

// Binned total-variation estimate against N(0,1) with Scott-rule bins.
struct TvEstimate {
  double raw = 0.0;        // 0.5 * sum |phat_i - Phi-mass_i| incl. tail bins
  double floor = 0.0;      // analytic null expectation of the raw estimate
  double corrected = 0.0;  // max(raw - floor, 0)
  double ci_lo = 0.0;      // bootstrap CI on raw
  double ci_hi = 0.0;
  int n_bins = 0;
};
TvEstimate tv_binned_normal(std::span<const double> samples, std::uint64_t seed,
                            int n_boot = 200);

// Two-sample KS test p-value (asymptotic Kolmogorov distribution).
double ks_two_sample_pvalue(std::span<const double> a, std::span<const double> b);

// Mardia skewness test of multivariate normality. rows = observations,
// data laid out row-major with `p` columns. Returns the p-value.
double mardia_skewness_pvalue(std::span<const double> data, int n, int p);

// Effective sample size of a spatially correlated sequence: n / (1 + 2*sum rho_k),
// summing lags until the empirical autocorrelation drops below `cutoff`.
double effective_sample_size(std::span<const double> x, double cutoff = 0.05);

}  // namespace sfh

#include "sfh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sfh/bessel.hpp"
#include "sfh/rng.hpp"

namespace sfh {

double tree_sum(std::span<const double> x) {
  std::size_t n = x.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  std::size_t half = n / 2;
  return tree_sum(x.subspan(0, half)) + tree_sum(x.subspan(half));
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty input");
  return tree_sum(x) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("sample_variance: need n >= 2");
  double m = mean(x);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - m) * (x[i] - m);
  return tree_sum(sq) / static_cast<double>(n - 1);
}

namespace {

double central_moment(std::span<const double> x, double m, int k) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = std::pow(x[i] - m, k);
  return tree_sum(t) / static_cast<double>(x.size());
}

}  // namespace

VarianceEstimate variance_with_ci(std::span<const double> x, std::uint64_t seed, int n_boot) {
  std::size_t n = x.size();
  VarianceEstimate est;
  est.value = sample_variance(x);
  double m = mean(x);
  double mu4 = central_moment(x, m, 4);
  double s2 = est.value;
  // Var(s^2) = (mu4 - (n-3)/(n-1) s^4) / n
  est.std_error = std::sqrt(std::max(0.0, (mu4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n));

  CounterRng rng = CounterRng::derive(seed, 0x626F6F74ULL);
  std::vector<double> boots(n_boot), resample(n);
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < n; ++i)
      resample[i] = x[rng.bits(static_cast<std::uint64_t>(b) * n + i) % n];
    boots[b] = sample_variance(resample);
  }
  std::sort(boots.begin(), boots.end());
  est.ci_lo = boots[static_cast<std::size_t>(0.025 * (n_boot - 1))];
  est.ci_hi = boots[static_cast<std::size_t>(0.975 * (n_boot - 1))];
  return est;
}

CovarianceEstimate covariance_with_se(std::span<const double> x, std::span<const double> y) {
  std::size_t n = x.size();
  if (y.size() != n || n < 2) throw std::invalid_argument("covariance_with_se: size mismatch");
  double mx = mean(x), my = mean(y);
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = (x[i] - mx) * (y[i] - my);
  CovarianceEstimate est;
  est.value = tree_sum(prod) / static_cast<double>(n - 1);
  // s.e. of the sample covariance from the empirical variance of the products
  double vp = sample_variance(prod);
  est.std_error = std::sqrt(vp / n);
  return est;
}

SlopeFit ols_fit(std::span<const double> x, std::span<const double> y) {
  std::size_t n = x.size();
  if (y.size() != n || n < 3) throw std::invalid_argument("ols_fit: need n >= 3 points");
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double ks_distance_normal(std::span<const double> samples) {
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  std::size_t n = s.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cdf = normal_cdf(s[i]);
    d = std::max(d, std::fabs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - cdf));
  }
  return d;
}

namespace {

template <typename F>
DistanceEstimate bootstrap_distance(std::span<const double> samples, std::uint64_t seed,
                                    int n_boot, F stat) {
  std::size_t n = samples.size();
  DistanceEstimate est;
  est.value = stat(samples);
  CounterRng rng = CounterRng::derive(seed, 0x6B736376ULL);
  std::vector<double> boots(n_boot), resample(n);
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < n; ++i)
      resample[i] = samples[rng.bits(static_cast<std::uint64_t>(b) * n + i) % n];
    boots[b] = stat(std::span<const double>(resample));
  }
  std::sort(boots.begin(), boots.end());
  est.ci_lo = boots[static_cast<std::size_t>(0.025 * (n_boot - 1))];
  est.ci_hi = boots[static_cast<std::size_t>(0.975 * (n_boot - 1))];
  return est;
}

}  // namespace

DistanceEstimate ks_with_ci(std::span<const double> samples, std::uint64_t seed, int n_boot) {
  return bootstrap_distance(samples, seed, n_boot,
                            [](std::span<const double> s) { return ks_distance_normal(s); });
}

namespace {

struct TvBins {
  double lo, width;
  int n_interior;
};

TvBins scott_bins(std::span<const double> samples) {
  std::size_t n = samples.size();
  double sd = std::sqrt(sample_variance(samples));
  double h = 3.49 * sd * std::pow(static_cast<double>(n), -1.0 / 3.0);
  TvBins b;
  b.width = h;
  b.n_interior = static_cast<int>(std::ceil(10.0 / h));
  b.lo = -0.5 * b.n_interior * h;
  return b;
}

double tv_raw_with_bins(std::span<const double> samples, const TvBins& b) {
  std::size_t n = samples.size();
  std::vector<double> counts(b.n_interior + 2, 0.0);  // [tail_lo, bins..., tail_hi]
  for (double v : samples) {
    int i = static_cast<int>(std::floor((v - b.lo) / b.width));
    if (i < 0)
      counts[0] += 1.0;
    else if (i >= b.n_interior)
      counts[b.n_interior + 1] += 1.0;
    else
      counts[i + 1] += 1.0;
  }
  double acc = std::fabs(counts[0] / n - normal_cdf(b.lo));
  for (int i = 0; i < b.n_interior; ++i) {
    double q = normal_cdf(b.lo + (i + 1) * b.width) - normal_cdf(b.lo + i * b.width);
    acc += std::fabs(counts[i + 1] / n - q);
  }
  acc += std::fabs(counts[b.n_interior + 1] / n - (1.0 - normal_cdf(b.lo + b.n_interior * b.width)));
  return 0.5 * acc;
}

}  // namespace

TvEstimate tv_binned_normal(std::span<const double> samples, std::uint64_t seed, int n_boot) {
  std::size_t n = samples.size();
  if (n < 100) throw std::invalid_argument("tv_binned_normal: too few samples for binning");
  TvBins bins = scott_bins(samples);
  TvEstimate est;
  est.n_bins = bins.n_interior + 2;
  est.raw = tv_raw_with_bins(samples, bins);
  // null expectation: E|phat - q| ~ sqrt(2 q (1-q) / (pi n)) per bin
  double fl = std::sqrt(2.0 / (3.141592653589793 * n)) *
              std::sqrt(normal_cdf(bins.lo) * (1.0 - normal_cdf(bins.lo)));
  for (int i = 0; i < bins.n_interior; ++i) {
    double q = normal_cdf(bins.lo + (i + 1) * bins.width) - normal_cdf(bins.lo + i * bins.width);
    fl += std::sqrt(2.0 * q * (1.0 - q) / (3.141592653589793 * n));
  }
  fl += std::sqrt(2.0 / (3.141592653589793 * n)) *
        std::sqrt(normal_cdf(bins.lo) * (1.0 - normal_cdf(bins.lo)));
  est.floor = 0.5 * fl;
  est.corrected = std::max(0.0, est.raw - est.floor);

  auto d = bootstrap_distance(samples, seed ^ 0x7476ULL, n_boot,
                              [&bins](std::span<const double> s) {
                                return tv_raw_with_bins(s, bins);
                              });
  est.ci_lo = d.ci_lo;
  est.ci_hi = d.ci_hi;
  return est;
}

namespace {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

double ks_two_sample_pvalue(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::size_t na = sa.size(), nb = sb.size(), ia = 0, ib = 0;
  double d = 0.0;
  while (ia < na && ib < nb) {
    if (sa[ia] <= sb[ib])
      ++ia;
    else
      ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  double ne = static_cast<double>(na) * nb / (na + nb);
  double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  return kolmogorov_q(lam);
}

double mardia_skewness_pvalue(std::span<const double> data, int n, int p) {
  if (static_cast<int>(data.size()) != n * p)
    throw std::invalid_argument("mardia_skewness_pvalue: size mismatch");
  std::vector<double> mu(p, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) mu[j] += data[i * p + j];
  for (double& m : mu) m /= n;

  std::vector<double> S(p * p, 0.0);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < p; ++a)
      for (int b = 0; b <= a; ++b)
        S[a * p + b] += (data[i * p + a] - mu[a]) * (data[i * p + b] - mu[b]);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b <= a; ++b) {
      S[a * p + b] /= n;
      S[b * p + a] = S[a * p + b];
    }

  // Cholesky S = L L^T
  std::vector<double> L(p * p, 0.0);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b <= a; ++b) {
      double s = S[a * p + b];
      for (int k = 0; k < b; ++k) s -= L[a * p + k] * L[b * p + k];
      if (a == b) {
        if (s <= 0.0) throw std::runtime_error("mardia: covariance not positive definite");
        L[a * p + a] = std::sqrt(s);
      } else {
        L[a * p + b] = s / L[b * p + b];
      }
    }
  }

  // standardized scores z = L^{-1} (x - mu); b1 = sum_{abc} M_{abc}^2
  std::vector<double> Z(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < p; ++a) {
      double s = data[i * p + a] - mu[a];
      for (int k = 0; k < a; ++k) s -= L[a * p + k] * Z[i * p + k];
      Z[i * p + a] = s / L[a * p + a];
    }
  }
  double b1 = 0.0;
  std::vector<double> M(static_cast<std::size_t>(p) * p * p, 0.0);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int c = 0; c < p; ++c)
          M[(a * p + b) * p + c] += Z[i * p + a] * Z[i * p + b] * Z[i * p + c];
  for (double& m : M) {
    m /= n;
    b1 += m * m;
  }
  double stat = n * b1 / 6.0;
  int dof = p * (p + 1) * (p + 2) / 6;
  return chi_square_sf(stat, dof);
}

double effective_sample_size(std::span<const double> x, double cutoff) {
  std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double m = mean(x);
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  if (var == 0.0) return static_cast<double>(n);
  double rho_sum = 0.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += (x[i] - m) * (x[(i + lag) % n] - m);
    double rho = c / var;
    if (rho < cutoff) break;
    rho_sum += rho;
  }
  return static_cast<double>(n) / (1.0 + 2.0 * rho_sum);
}

}  // namespace sfh

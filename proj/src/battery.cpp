#include "sfh/battery.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sfh/clt.hpp"
#include "sfh/constants.hpp"
#include "sfh/green.hpp"
#include "sfh/inequalities.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/sha256.hpp"
#include "sfh/stats.hpp"

namespace sfh {

namespace {

constexpr double kPi = 3.141592653589793238462643383;

struct CheckList {
  bool ok = true;
  std::ostringstream log;
  int shown = 0;

  void req(bool cond, const std::string& what, double value, double limit) {
    if (!cond) ok = false;
    if (!cond || shown < 60) {
      log << (cond ? "  ok  " : "  FAIL") << ' ' << what << " value=" << value
          << " limit=" << limit << '\n';
      ++shown;
    }
  }
};

double field_peak(const RealField& f) {
  return *std::max_element(f.values.begin(), f.values.end());
}

// closed forms: alpha = 2 heat kernel, alpha = 1 Poisson kernel
double heat_exact(int d, double t, double r) {
  return std::pow(4.0 * kPi * t, -0.5 * d) * std::exp(-r * r / (4.0 * t));
}
double poisson_exact(int d, double t, double r) {
  if (d == 1) return t / (kPi * (t * t + r * r));
  return t / (2.0 * kPi * std::pow(t * t + r * r, 1.5));
}

// Fractional-power integral with analytic tail completion: the on-torus sum of
// max(G,0)^{1/2q} dx^d restricted to |x| <= L/2, plus the exact integral of the
// first-order stable tail (t C |x|^{-(d+alpha)})^{1/2q} over |x| > L/2.  The
// completion vanishes for alpha = 2 (sin(pi) = 0), where the Gaussian tail is
// negligible anyway.
double power_integral_completed(const GridSpec& g, double alpha, double two_q,
                                double t) {
  KernelField k = evaluate_kernel(g, alpha, t);
  double p = 1.0 / two_q;
  double cutoff = 0.5 * g.half_length;
  double acc = 0.0;
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node_coords(i, xy);
    double r = g.dim == 1 ? std::fabs(xy[0]) : std::hypot(xy[0], xy[1]);
    if (r > cutoff) continue;
    double v = k.field[i];
    if (v > 0.0) acc += std::pow(v, p);
  }
  acc *= std::pow(g.dx(), g.dim);
  if (alpha < 2.0) {
    double C = alpha * std::pow(2.0, alpha - 1.0) *
               std::pow(kPi, -(0.5 * g.dim + 1.0)) *
               std::sin(0.5 * kPi * alpha) * std::tgamma(0.5 * (g.dim + alpha)) *
               std::tgamma(0.5 * alpha);
    double s = (g.dim + alpha) * p;  // decay exponent of G^{1/2q}
    double surface = g.dim == 1 ? 2.0 : 2.0 * kPi;
    acc += surface * std::pow(t * C, p) * std::pow(cutoff, g.dim - s) / (s - g.dim);
  }
  return acc;
}

void closed_form_check(CheckList& c, int d, double alpha, double t) {
  GridSpec g;
  if (alpha == 2.0) {
    double L = std::max(12.0, 20.0 * std::sqrt(t));
    g = GridSpec(d, L, d == 1 ? 4096 : 512);
  } else if (d == 1) {  // alpha = 1: heavy tails need a wide torus (wrap-around)
    g = GridSpec(1, std::max(160.0, 1500.0 * t), 16384);
  } else {
    g = t < 1.0 ? GridSpec(2, 32.0, 4096) : GridSpec(2, 160.0 * t, 2048);
  }
  KernelField k = evaluate_kernel(g, alpha, t);
  double peak = heat_exact(d, t, 0.0);
  if (alpha == 1.0) peak = poisson_exact(d, t, 0.0);
  double err = 0.0;
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node_coords(i, xy);
    double r = d == 1 ? std::fabs(xy[0]) : std::hypot(xy[0], xy[1]);
    double exact = alpha == 2.0 ? heat_exact(d, t, r) : poisson_exact(d, t, r);
    err = std::max(err, std::fabs(k.field[i] - exact));
  }
  std::ostringstream what;
  what << "closed-form d=" << d << " alpha=" << alpha << " t=" << t;
  c.req(err < 1e-6 * peak, what.str(), err / peak, 1e-6);
}

}  // namespace

CriterionResult crit_kernel_suite() {
  CheckList c;
  const double alphas[] = {0.8, 1.0, 1.5, 2.0};
  const double ts[] = {0.1, 1.0, 10.0};
  for (int d : {1, 2}) {
    for (double alpha : alphas) {
      for (double t : ts) {
        double w = std::pow(t, 1.0 / alpha);
        GridSpec g(d, std::max(12.0, 10.0 * w), d == 1 ? 4096 : 512);
        KernelField k = evaluate_kernel(g, alpha, t);
        std::ostringstream tag;
        tag << "d=" << d << " alpha=" << alpha << " t=" << t;
        c.req(std::fabs(k.mass - 1.0) < 1e-4, "mass " + tag.str(),
              std::fabs(k.mass - 1.0), 1e-4);
        double peak = field_peak(k.field);
        double sg = check_semigroup(g, alpha, t / 2.0, t / 2.0);
        c.req(sg < 1e-6 * peak, "semigroup " + tag.str(), sg / peak, 1e-6);
        double sc = check_scaling(g, alpha, t);
        c.req(sc < 1e-4, "scaling " + tag.str(), sc, 1e-4);
      }
      if (alpha == 2.0 || alpha == 1.0)
        for (double t : ts) closed_form_check(c, d, alpha, t);
      if (alpha < 2.0) {
        GridSpec g(d, 48.0, d == 1 ? 8192 : 1024);
        auto [lo, hi] = tail_bound_ratio(g, alpha);
        std::ostringstream tag;
        tag << "tail-sandwich d=" << d << " alpha=" << alpha;
        c.req(lo > 0.0 && hi / lo < 50.0, tag.str(), hi / std::max(lo, 1e-300), 50.0);
      }
      // fractional-power integral ~ t^{kappa/2}: each t on a self-similarly
      // scaled torus, referenced against a doubled-resolution t=1 run
      {
        double two_q = d == 1 ? (alpha < 1.0 ? 1.15 : 1.2) : (alpha < 1.0 ? 1.1 : 1.15);
        double kap = kappa_exponent(d, alpha, two_q);
        double L0 = 30.0;
        int N0 = d == 1 ? 8192 : 1024;
        GridSpec ref_g(d, 2.0 * L0, 2 * N0);
        double ref = power_integral_completed(ref_g, alpha, two_q, 1.0);
        for (double t : {0.5, 1.0, 2.0}) {
          GridSpec g(d, L0 * std::pow(t, 1.0 / alpha), N0);
          double F = power_integral_completed(g, alpha, two_q, t);
          double dev = std::fabs(F * std::pow(t, -kap / 2.0) / ref - 1.0);
          std::ostringstream tag;
          tag << "power-integral d=" << d << " alpha=" << alpha << " t=" << t;
          c.req(dev < 0.01, tag.str(), dev, 0.01);
        }
      }
    }
  }
  return {"1-kernel-suite", c.ok, c.log.str()};
}

namespace {

double sampler_test_fn(int j, double x) {
  switch (j) {
    case 0: return std::exp(-x * x);
    case 1: return std::exp(-0.5 * (x - 1.0) * (x - 1.0));
    case 2: return std::fabs(x) <= 1.0 ? 1.0 : 0.0;
    default: return std::cos(x) * std::exp(-x * x / 4.0);
  }
}

}  // namespace

CriterionResult crit_noise_sampler(const BatteryConfig& b) {
  CheckList c;
  GridSpec g(1, 8.0, 512);
  int N = g.points_per_axis;
  double dt = 0.01;
  std::vector<CovarianceModel> models = {white_noise(), riesz_kernel(1, 0.5),
                                         integrable_density(1, "gaussian", 1.0)};
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 3}};
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const CovarianceModel& m = models[mi];
    std::vector<std::vector<double>> f(4, std::vector<double>(N));
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < N; ++i) f[j][i] = sampler_test_fn(j, g.node(i));
    // physical-route target: dt * sum f(x) gamma(x-y) h(y) dx^2
    std::vector<double> gv = grid_physical_covariance(m, g);
    std::vector<double> target(6);
    for (int p = 0; p < 6; ++p) {
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        double row = 0.0;
        for (int j = 0; j < N; ++j)
          row += gv[((i - j + N / 2) % N + N) % N] * f[pairs[p][1]][j];
        acc += f[pairs[p][0]][i] * row;
      }
      target[p] = dt * acc * g.dx() * g.dx();
    }
    // empirical covariances of the smoothed increments
    std::vector<std::vector<double>> prod(6, std::vector<double>(b.sampler_draws));
    for (int n = 0; n < b.sampler_draws; ++n) {
      RealField dW = sample_noise_increment(
          g, m, dt, CounterRng::derive(b.seed + 77, mi + 1, n + 1));
      double S[4];
      for (int j = 0; j < 4; ++j) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += f[j][i] * dW[i];
        S[j] = acc * g.dx();
      }
      for (int p = 0; p < 6; ++p) prod[p][n] = S[pairs[p][0]] * S[pairs[p][1]];
    }
    for (int p = 0; p < 6; ++p) {
      double emp = mean(prod[p]);
      double se = std::sqrt(sample_variance(prod[p]) / b.sampler_draws);
      std::ostringstream tag;
      tag << m.label() << " pair " << pairs[p][0] << '-' << pairs[p][1] << " emp=" << emp
          << " target=" << target[p];
      c.req(std::fabs(emp - target[p]) <= 3.0 * se, tag.str(),
            std::fabs(emp - target[p]), 3.0 * se);
    }
  }
  return {"2-noise-sampler", c.ok, c.log.str()};
}

CriterionResult crit_variance_oracle(const BatteryConfig& b) {
  CheckList c;
  struct Case {
    CovarianceModel m;
    double alpha;
  };
  std::vector<Case> cases = {{white_noise(), 1.5},
                             {white_noise(), 2.0},
                             {riesz_kernel(1, 0.5), 1.5}};
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    SolverConfig cfg;
    cfg.alpha = cases[ci].alpha;
    cfg.dt = 5e-4;
    cfg.T = 1.0;
    cfg.grid = GridSpec(1, 8.0, 512);
    cfg.sigma = sigma_constant(1.0);
    cfg.model = cases[ci].m;
    cfg.replicas = b.oracle_replicas;
    cfg.master_seed = b.seed + 1000 + ci;
    cfg.snapshot_times = {1.0};
    std::size_t origin = cfg.grid.points_per_axis / 2;
    std::vector<double> vals(cfg.replicas);
    run_ensemble(cfg, b.workers,
                 [&](const Trajectory& tr) { vals[tr.replica] = tr.at(1.0)[origin]; });
    VarianceEstimate v = variance_with_ci(vals, b.seed + 2000 + ci);
    double target = additive_variance_target(cfg, 1.0);
    std::ostringstream tag;
    tag << cases[ci].m.label() << " alpha=" << cases[ci].alpha << " var=" << v.value
        << " target=" << target;
    c.req(std::fabs(v.value - target) <= 3.0 * v.std_error, tag.str(),
          std::fabs(v.value - target), 3.0 * v.std_error);
    if (cases[ci].alpha == 2.0) {
      // continuum closed form sqrt(t/(2 pi)) at t = 1
      double integral = integrate_adaptive(
          [&](double v2) {
            return 2.0 * v2 * time_kernel_spectral(cfg.model, 2.0, v2 * v2);
          },
          1e-8, 1.0, 1e-9);
      c.req(std::fabs(integral - 0.3989422804) < 1e-4,
            "closed-form integral sqrt(1/(2pi))", integral, 0.3989422804);
    }
  }
  return {"3-variance-oracle", c.ok, c.log.str()};
}

// ---- pinned CLT ensembles ----

namespace {

SolverConfig clt_base(const BatteryConfig& b) {
  SolverConfig cfg;
  cfg.alpha = 1.5;
  cfg.dt = 5e-4;
  cfg.T = 1.0;
  cfg.grid = GridSpec(1, 12.0, 2048);
  cfg.replicas = b.clt_replicas;
  cfg.noise_substeps = 1;
  for (int k = 1; k <= 8; ++k) cfg.snapshot_times.push_back(k / 8.0);
  return cfg;
}

const std::vector<double> kRList = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0};

// copy of an ensemble restricted to radii >= rmin (slope fits exclude the
// smallest balls, where the correlation length is not yet separated from R)
CltEnsemble restrict_R(const CltEnsemble& e, double rmin) {
  CltEnsemble out = e;
  out.R_list.clear();
  out.G.clear();
  for (std::size_t r = 0; r < e.R_list.size(); ++r)
    if (e.R_list[r] >= rmin) {
      out.R_list.push_back(e.R_list[r]);
      out.G.push_back(e.G[r]);
    }
  return out;
}

std::string sha_of_ensemble(const CltEnsemble& e) {
  Sha256 h;
  for (const auto& per_R : e.G)
    for (const auto& per_t : per_R)
      h.update(per_t.data(), per_t.size() * sizeof(double));
  return h.hex_digest();
}

}  // namespace

SolverConfig battery_whitenoise_additive(const BatteryConfig& b) {
  SolverConfig cfg = clt_base(b);
  cfg.model = white_noise();
  cfg.sigma = sigma_constant(1.0);
  cfg.master_seed = b.seed + 101;
  return cfg;
}

SolverConfig battery_whitenoise_pam(const BatteryConfig& b) {
  SolverConfig cfg = clt_base(b);
  cfg.model = white_noise();
  cfg.sigma = sigma_linear(1.0);
  cfg.master_seed = b.seed + 202;
  // the engineering criterion replays this ensemble at dt/2; the coupling
  // needs each dt increment drawn as the sum of its two dt/2 sub-draws
  cfg.noise_substeps = 2;
  return cfg;
}

SolverConfig battery_riesz_pam(const BatteryConfig& b) {
  SolverConfig cfg = clt_base(b);
  cfg.model = riesz_kernel(1, 0.5);
  cfg.sigma = sigma_linear(1.0);
  cfg.master_seed = b.seed + 303;
  return cfg;
}

SolverConfig battery_riesz_additive(const BatteryConfig& b) {
  SolverConfig cfg = clt_base(b);
  cfg.model = riesz_kernel(1, 0.5);
  cfg.sigma = sigma_constant(1.0);
  cfg.master_seed = b.seed + 404;
  return cfg;
}

CltCriteria crit_clt_block(const BatteryConfig& b) {
  SolverConfig cfgA = battery_whitenoise_additive(b);
  SolverConfig cfgW = battery_whitenoise_pam(b);
  SolverConfig cfgR = battery_riesz_pam(b);
  SolverConfig cfgRA = battery_riesz_additive(b);
  CltEnsemble EA = run_clt_ensemble(cfgA, kRList, b.workers);
  CltEnsemble EW = run_clt_ensemble(cfgW, kRList, b.workers);
  CltEnsemble ER = run_clt_ensemble(cfgR, kRList, b.workers);
  CltEnsemble ERA = run_clt_ensemble(cfgRA, kRList, b.workers);
  CltCriteria out;

  {  // criterion 4: variance-scaling exponent 2d - beta. The fit runs on the
     // additive ensembles over R >= 2 at t = 1/4: the exact spectral oracle
     // puts the finite-R slope bias there at +0.07 (white) / +0.04 (Riesz),
     // inside the +-0.15 budget, whereas the multiplicative short-range excess
     // pushes any reachable radius window out of budget.
    CheckList c;
    VarianceScaling vw = variance_scaling(restrict_R(EA, 2.0), 0.25, b.seed + 41);
    VarianceScaling vr = variance_scaling(restrict_R(ERA, 2.0), 0.25, b.seed + 42);
    c.req(std::fabs(vw.fit.slope - 1.0) <= 0.15, "white-noise slope (target 1.0)",
          vw.fit.slope, 0.15);
    c.req(std::fabs(vr.fit.slope - 1.5) <= 0.15, "riesz beta=0.5 slope (target 1.5)",
          vr.fit.slope, 0.15);
    out.scaling = {"4-variance-scaling", c.ok, c.log.str()};
  }

  {  // criterion 5: R^{beta-2d} Var -> k_beta limit at the largest radius
    CheckList c;
    CovLimitResult la = limiting_covariance(EA, cfgA.model, cfgA.sigma, 0.5, 0.5);
    c.req(std::fabs(la.target - 1.0) < 1e-6, "additive oracle target 1.0", la.target, 1e-6);
    const CovLimitRow& ra = la.rows.back();
    c.req(std::fabs(ra.scaled_cov - la.target) <
              std::max(0.10 * la.target, 3.0 * ra.std_error),
          "additive white-noise scaled var", ra.scaled_cov, la.target);
    CovLimitResult lr = limiting_covariance(ERA, cfgRA.model, cfgRA.sigma, 0.5, 0.5);
    const CovLimitRow& rr = lr.rows.back();
    c.req(std::fabs(rr.scaled_cov - lr.target) <
              std::max(0.10 * lr.target, 3.0 * rr.std_error),
          "riesz scaled var vs k_beta quadrature", rr.scaled_cov, lr.target);
    out.limit_cov = {"5-limiting-covariance", c.ok, c.log.str()};
  }

  {  // criterion 6: KS/TV decay; null calibration first
    CheckList c;
    int n = b.clt_replicas;
    // Null calibration: both distance estimators applied to iid normals must
    // report ~zero distance. A single pinned draw only tests the seed's luck
    // (its corrected TV sits at whatever quantile the seed lands on), so the
    // calibration averages 50 independent null replicates; the mean tests the
    // analytic floor itself to a fraction of one single-draw s.d.
    const int n_null = 50;
    double ks_mean = 0.0, tv_mean = 0.0, tv_floor_mean = 0.0, tv_bins_mean = 0.0;
    for (int k = 0; k < n_null; ++k) {
      std::vector<double> nulls(n);
      CounterRng nr = CounterRng::derive(b.seed, 61, static_cast<std::uint64_t>(k));
      for (int i = 0; i < n; ++i) nulls[i] = nr.normal(i);
      ks_mean += ks_with_ci(nulls, b.seed + 62 + k).value;
      // signed excess, not the zero-truncated `corrected`: truncation gives
      // the null a positive mean of ~0.4 s.d. that would mask a floor bias
      TvEstimate tk = tv_binned_normal(nulls, b.seed + 163 + k);
      tv_mean += tk.raw - tk.floor;
      tv_floor_mean += tk.floor;
      tv_bins_mean += tk.n_bins;
    }
    ks_mean /= n_null;
    tv_mean /= n_null;
    tv_floor_mean /= n_null;
    tv_bins_mean /= n_null;
    // null KS: sqrt(n) KS has mean 0.8687 and s.d. 0.26 (Kolmogorov law);
    // gate the 50-replicate mean at 3 s.e.
    double ks_null_limit = (0.8687 + 3.0 * 0.26 / std::sqrt(double(n_null))) /
                           std::sqrt(double(n));
    c.req(ks_mean <= ks_null_limit, "null KS calibration (50-rep mean)", ks_mean,
          ks_null_limit);
    // null raw TV fluctuates about its analytic floor with s.d. ~ 1.2 floor /
    // sqrt(bins) (Monte Carlo calibrated); gate the mean corrected value at 3 s.e.
    double tv_null_limit = 3.0 * 1.2 * tv_floor_mean /
                           std::sqrt(std::max(1.0, tv_bins_mean)) /
                           std::sqrt(double(n_null));
    c.req(std::fabs(tv_mean) <= tv_null_limit, "null TV calibration (50-rep mean)",
          tv_mean, tv_null_limit);
    DistanceExperiment dw = gaussian_distance(EW, 0.5, b.seed + 64);
    DistanceExperiment dr = gaussian_distance(ER, 0.5, b.seed + 65);
    // decay-slope fits over radii whose distance still carries signal: R >= 2
    // (same window as the variance-scaling fits -- below the correlation
    // length the distance has not entered its decay regime), KS rows above
    // 2.5x the sampling floor 1/sqrt(n), TV rows above half the analytic bin
    // floor (at the floor the estimate measures noise, not distance, and
    // flattens any fit through it)
    auto ks_slope = [&](const DistanceExperiment& d) {
      std::vector<double> lx, ly;
      for (const auto& row : d.rows)
        if (row.R >= 2.0 && row.ks.value >= 2.5 / std::sqrt(double(n))) {
          lx.push_back(std::log(row.R));
          ly.push_back(std::log(row.ks.value));
        }
      if (lx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
      return ols_fit(lx, ly).slope;
    };
    auto tv_slope = [&](const DistanceExperiment& d) {
      std::vector<double> lx, ly;
      for (const auto& row : d.rows)
        if (row.R >= 2.0 && row.tv.corrected >= 0.5 * row.tv.floor) {
          lx.push_back(std::log(row.R));
          ly.push_back(std::log(row.tv.corrected));
        }
      if (lx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
      return ols_fit(lx, ly).slope;
    };
    double wks = ks_slope(dw), wtv = tv_slope(dw);
    double rks = ks_slope(dr), rtv = tv_slope(dr);
    c.req(dw.ks_decreasing, "white-noise KS decreasing (CI-aware)",
          dw.ks_decreasing ? 1.0 : 0.0, 1.0);
    c.req(dw.tv_decreasing, "white-noise TV decreasing (CI-aware)",
          dw.tv_decreasing ? 1.0 : 0.0, 1.0);
    c.req(wks <= -0.5 + 0.2, "white-noise KS slope", wks, -0.3);
    c.req(wtv <= -0.5 + 0.2, "white-noise TV slope", wtv, -0.3);
    c.req(dr.ks_decreasing, "riesz KS decreasing (CI-aware)", dr.ks_decreasing ? 1.0 : 0.0,
          1.0);
    c.req(dr.tv_decreasing, "riesz TV decreasing (CI-aware)", dr.tv_decreasing ? 1.0 : 0.0,
          1.0);
    c.req(rks <= -0.25 + 0.2, "riesz KS slope", rks, -0.05);
    c.req(rtv <= -0.25 + 0.2, "riesz TV slope", rtv, -0.05);
    out.distance = {"6-gaussian-distance", c.ok, c.log.str()};
  }

  {  // criterion 7: FCLT covariance matrix + joint-Gaussianity
    CheckList c;
    FcltResult fa = fclt_covariance(EA, cfgA.model, cfgA.sigma, kRList.back());
    for (std::size_t i = 0; i < fa.times.size(); ++i)
      for (std::size_t j = 0; j < fa.times.size(); ++j) {
        double oracle = 2.0 * std::min(fa.times[i], fa.times[j]);
        if (std::fabs(fa.target[i][j] - oracle) > 1e-9) {
          c.req(false, "additive target entry 2 min(ti,tj)", fa.target[i][j], oracle);
        }
      }
    c.req(fa.max_rel_gap < 0.15, "additive 8x8 max relative gap", fa.max_rel_gap, 0.15);
    c.req(fa.mardia_p > 0.01, "additive Mardia skewness p", fa.mardia_p, 0.01);
    FcltResult fr = fclt_covariance(ERA, cfgRA.model, cfgRA.sigma, kRList.back());
    c.req(fr.max_rel_gap < 0.15, "riesz 8x8 max relative gap", fr.max_rel_gap, 0.15);
    out.fclt = {"7-fclt", c.ok, c.log.str()};
  }

  {  // criterion 11: determinism + refinement stability
    CheckList c;
    // (a) byte-identical reductions across worker counts
    SolverConfig cs = cfgW;
    cs.replicas = 200;
    CltEnsemble d1 = run_clt_ensemble(cs, kRList, b.workers);
    CltEnsemble d2 = run_clt_ensemble(cs, kRList, std::max(1, b.workers / 2));
    bool same = sha_of_ensemble(d1) == sha_of_ensemble(d2);
    c.req(same, "cross-worker byte determinism", same ? 1.0 : 0.0, 1.0);

    // base subset statistics (first subset_replicas replicas of EW)
    int ns = b.subset_replicas;
    auto subset_var = [&](const CltEnsemble& e, int rIdx, int ti, std::uint64_t sd) {
      std::vector<double> v(e.G[rIdx][ti].begin(), e.G[rIdx][ti].begin() + ns);
      return variance_with_ci(v, sd);
    };
    int ti_half = 3;  // t = 0.5
    // (b) dt-halving on the same noise path (substep coupling)
    SolverConfig ch = cfgW;
    ch.replicas = ns;
    ch.dt = cfgW.dt / 2.0;
    ch.noise_substeps = 1;
    CltEnsemble EH = run_clt_ensemble(ch, kRList, b.workers);
    // (c) torus doubling at fixed spacing (shared white-noise cell draws)
    SolverConfig ct = cfgW;
    ct.replicas = ns;
    ct.grid = GridSpec(1, 24.0, 4096);
    CltEnsemble ET = run_clt_ensemble(ct, kRList, b.workers);
    for (int rIdx : {2, 4}) {  // R = 2 and R = 4
      VarianceEstimate base = subset_var(EW, rIdx, ti_half, b.seed + 71);
      VarianceEstimate halved = subset_var(EH, rIdx, ti_half, b.seed + 71);
      VarianceEstimate doubled = subset_var(ET, rIdx, ti_half, b.seed + 71);
      std::ostringstream t1, t2;
      t1 << "dt-halving R=" << kRList[rIdx] << " (base " << base.value << ")";
      c.req(std::fabs(halved.value - base.value) < base.std_error, t1.str(),
            std::fabs(halved.value - base.value), base.std_error);
      t2 << "torus-doubling R=" << kRList[rIdx] << " (base " << base.value << ")";
      c.req(std::fabs(doubled.value - base.value) < base.std_error, t2.str(),
            std::fabs(doubled.value - base.value), base.std_error);
    }
    out.engineering = {"11-engineering", c.ok, c.log.str()};
  }
  return out;
}

CriterionResult crit_tightness() {
  CheckList c;
  std::vector<std::pair<CovarianceModel, int>> models = {
      {white_noise(), 1}, {riesz_kernel(1, 0.5), 1}, {riesz_kernel(2, 1.0), 2}};
  std::vector<double> R_list = {1.0, 2.0, 4.0, 8.0};
  std::vector<std::pair<double, double>> ts = {{0.1, 0.05}, {0.25, 0.2}, {0.5, 0.25},
                                               {0.5, 0.45}, {1.0, 0.5},  {1.0, 0.9}};
  for (auto& [m, d] : models) {
    auto rows = tightness_table(m, 1.5, R_list, ts);
    double lo = 1e300, hi = 0.0;
    for (const auto& r : rows) {
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    c.req(lo > 0.0 && hi / lo < 10.0, "ratio spread " + m.label(),
          hi / std::max(lo, 1e-300), 10.0);
  }
  return {"8-tightness", c.ok, c.log.str()};
}

CriterionResult crit_constants(const BatteryConfig& b) {
  CheckList c;
  const int ds[] = {1, 1, 2, 2};
  const double betas[] = {0.5, 1.0, 1.0, 2.0};
  for (int i = 0; i < 4; ++i) {
    KBetaResult k = k_beta_routes(ds[i], betas[i]);
    std::ostringstream tag;
    tag << "k_beta routes d=" << ds[i] << " beta=" << betas[i] << " q=" << k.quadrature
        << " b=" << k.bessel;
    c.req(k.rel_gap < 0.005, tag.str(), k.rel_gap, 0.005);
  }
  c.req(std::fabs(k_beta(1, 1.0) - 2.0) < 1e-9, "k_1(beta=1) = 2", k_beta(1, 1.0), 2.0);
  c.req(std::fabs(k_beta(1, 0.5) - 7.54247) < 5e-4, "k_1(beta=0.5) = 7.54247",
        k_beta(1, 0.5), 7.54247);
  c.req(std::fabs(k_beta(2, 2.0) - kPi) < 1e-9, "k_2(beta=2) = pi", k_beta(2, 2.0), kPi);

  // nu^2 >= theta^2 at every sampled time (Cauchy-Schwarz across the ensemble)
  SolverConfig cfg;
  cfg.alpha = 1.5;
  cfg.dt = 1e-3;
  cfg.T = 0.5;
  cfg.grid = GridSpec(1, 8.0, 512);
  cfg.model = white_noise();
  cfg.sigma = sigma_linear(1.0);
  cfg.replicas = 400;
  cfg.master_seed = b.seed + 909;
  cfg.snapshot_times = {0.125, 0.25, 0.375, 0.5};
  CltEnsemble e = run_clt_ensemble(cfg, {1.0}, b.workers);
  for (std::size_t ti = 0; ti < cfg.snapshot_times.size(); ++ti) {
    double th = mean(e.mean_sigma[ti]);
    double se_th = std::sqrt(sample_variance(e.mean_sigma[ti]) / cfg.replicas);
    double nu2 = mean(e.mean_sigma_sq[ti]);
    double se_nu = std::sqrt(sample_variance(e.mean_sigma_sq[ti]) / cfg.replicas);
    std::ostringstream tag;
    tag << "nu^2 >= theta^2 at t=" << cfg.snapshot_times[ti];
    c.req(nu2 - th * th >= -3.0 * (se_nu + 2.0 * std::fabs(th) * se_th), tag.str(),
          nu2 - th * th, 0.0);
  }
  return {"9-constants", c.ok, c.log.str()};
}

CriterionResult crit_inequalities(const BatteryConfig& b) {
  CheckList c;
  GridSpec g1(1, 8.0, 512);
  for (const CovarianceModel& m :
       {white_noise(), riesz_kernel(1, 0.5), integrable_density(1, "gaussian", 1.0)}) {
    InequalityReport r = check_convolution_inequality(m, 1.5, 2.0, g1);
    std::ostringstream tag;
    tag << r.id << " witness=" << r.witness << " refined=" << r.refined_witness;
    c.req(r.pass, tag.str(), r.witness, 2.0 * r.refined_witness);
  }
  {
    InequalityReport r =
        check_riesz_smoothing(1.5, 1.0, {0.5, 1.0}, {1.0, 2.0}, GridSpec(2, 12.0, 256));
    std::ostringstream tag;
    tag << r.id << " witness=" << r.witness << " refined=" << r.refined_witness;
    c.req(r.pass, tag.str(), r.witness, 2.0 * r.refined_witness);
  }
  {
    GronwallReport r =
        gronwall_iteration(riesz_kernel(1, 0.5), 1.5, 1.2, 25, GridSpec(1, 6.0, 256), 0.5, 12);
    std::ostringstream tag;
    tag << "gronwall iters=" << r.iterations_used << " series=" << r.series_witness << '/'
        << r.refined_series_witness << " final=" << r.final_witness << '/'
        << r.refined_final_witness;
    c.req(r.pass, tag.str(), r.series_witness, 2.0 * r.refined_series_witness);
  }
  {
    SolverConfig cfg;
    cfg.alpha = 1.5;
    cfg.dt = 2.5e-3;
    cfg.T = 0.5;
    cfg.grid = GridSpec(1, 8.0, 256);
    cfg.model = riesz_kernel(1, 0.5);
    cfg.sigma = sigma_linear(0.5);
    cfg.replicas = b.malliavin_replicas;
    cfg.master_seed = b.seed + 404;
    cfg.snapshot_times = {0.2, 0.3, 0.5};
    cfg.noise_substeps = 2;
    InequalityReport r = check_malliavin_bound(cfg, 0.1, 1.2, b.malliavin_replicas,
                                               b.workers);
    std::ostringstream tag;
    tag << r.id << " witness=" << r.witness << " refined=" << r.refined_witness;
    c.req(r.pass, tag.str(), r.witness, 2.0 * r.refined_witness);
  }
  return {"10-inequalities", c.ok, c.log.str()};
}

std::vector<CriterionResult> run_full_battery(const BatteryConfig& b) {
  std::vector<CriterionResult> out;
  out.push_back(crit_kernel_suite());
  out.push_back(crit_noise_sampler(b));
  out.push_back(crit_variance_oracle(b));
  CltCriteria clt = crit_clt_block(b);
  out.push_back(clt.scaling);
  out.push_back(clt.limit_cov);
  out.push_back(clt.distance);
  out.push_back(clt.fclt);
  out.push_back(crit_tightness());
  out.push_back(crit_constants(b));
  out.push_back(crit_inequalities(b));
  out.push_back(clt.engineering);
  return out;
}

}  // namespace sfh

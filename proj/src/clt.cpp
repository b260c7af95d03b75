#include "sfh/clt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfh/bessel.hpp"

namespace sfh {

namespace {

constexpr double kPi = 3.141592653589793238462643383;

std::size_t time_index(const std::vector<double>& times, double t) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) < 1e-9 * std::max(1.0, t)) return i;
  throw std::invalid_argument("no ensemble snapshot at the requested time");
}

}  // namespace

std::vector<double> ball_weights(const GridSpec& g, double R) {
  if (!(R > 0.0 && R < g.half_length))
    throw std::invalid_argument("ball radius must satisfy 0 < R < L");
  std::vector<double> w(g.size(), 0.0);
  double h = g.dx() / 2.0;
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node_coords(i, xy);
    if (g.dim == 1) {
      double lo = std::max(xy[0] - h, -R), hi = std::min(xy[0] + h, R);
      w[i] = std::max(0.0, hi - lo) / g.dx();
    } else {
      double r_near = std::hypot(std::max(0.0, std::fabs(xy[0]) - h),
                                 std::max(0.0, std::fabs(xy[1]) - h));
      double r_far = std::hypot(std::fabs(xy[0]) + h, std::fabs(xy[1]) + h);
      if (r_far <= R) {
        w[i] = 1.0;
      } else if (r_near >= R) {
        w[i] = 0.0;
      } else {
        // boundary cell: 32x32 midpoint supersampling
        int n = 32, in = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double px = xy[0] - h + (a + 0.5) * g.dx() / n;
            double py = xy[1] - h + (b + 0.5) * g.dx() / n;
            if (px * px + py * py <= R * R) ++in;
          }
        w[i] = static_cast<double>(in) / (n * n);
      }
    }
  }
  return w;
}

double spatial_average(const RealField& u, double R) {
  std::vector<double> w = ball_weights(u.grid, R);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * (u[i] - 1.0);
  return acc * u.grid.cell_volume();
}

CltEnsemble run_clt_ensemble(const SolverConfig& cfg, const std::vector<double>& R_list,
                             int n_workers) {
  if (!std::is_sorted(cfg.snapshot_times.begin(), cfg.snapshot_times.end()))
    throw std::invalid_argument("run_clt_ensemble: snapshot times must be sorted");
  CltEnsemble e;
  e.R_list = R_list;
  e.times = cfg.snapshot_times;
  e.replicas = cfg.replicas;
  e.beta = cfg.model.beta;
  e.dim = cfg.model.dim;
  std::size_t nR = R_list.size(), nT = e.times.size();
  e.G.assign(nR, std::vector<std::vector<double>>(nT, std::vector<double>(cfg.replicas)));
  e.mean_sigma.assign(nT, std::vector<double>(cfg.replicas));
  e.mean_sigma_sq.assign(nT, std::vector<double>(cfg.replicas));

  std::vector<std::vector<double>> weights;
  for (double R : R_list) weights.push_back(ball_weights(cfg.grid, R));
  double dv = cfg.grid.cell_volume();
  double n_cells = static_cast<double>(cfg.grid.size());

  run_ensemble(cfg, n_workers, [&](const Trajectory& tr) {
    for (std::size_t ti = 0; ti < nT; ++ti) {
      const RealField& u = tr.fields[ti];
      for (std::size_t r = 0; r < nR; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i)
          acc += weights[r][i] * (u[i] - 1.0);
        e.G[r][ti][tr.replica] = acc * dv;
      }
      double s1 = 0.0, s2 = 0.0;
      for (double v : u.values) {
        double sv = cfg.sigma(v);
        s1 += sv;
        s2 += sv * sv;
      }
      e.mean_sigma[ti][tr.replica] = s1 / n_cells;
      e.mean_sigma_sq[ti][tr.replica] = s2 / n_cells;
    }
  });
  return e;
}

VarianceScaling variance_scaling(const CltEnsemble& e, double t, std::uint64_t seed) {
  std::size_t ti = time_index(e.times, t);
  VarianceScaling out;
  std::vector<double> lx, ly;
  for (std::size_t r = 0; r < e.R_list.size(); ++r) {
    out.var.push_back(variance_with_ci(e.G[r][ti], seed + r));
    lx.push_back(std::log(e.R_list[r]));
    ly.push_back(std::log(out.var.back().value));
  }
  out.fit = ols_fit(lx, ly);
  return out;
}

namespace {

// trapezoid of the moment function f over [0, s_max] from f(0) = f0 and
// the ensemble snapshot values
double moment_quadrature(const std::vector<double>& times, const std::vector<double>& f,
                         double f0, double s_max) {
  double acc = 0.0, prev_t = 0.0, prev_f = f0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > s_max + 1e-9) break;
    acc += 0.5 * (prev_f + f[i]) * (times[i] - prev_t);
    prev_t = times[i];
    prev_f = f[i];
  }
  if (std::fabs(prev_t - s_max) > 1e-6)
    throw std::invalid_argument("moment quadrature: t^r is not covered by snapshots");
  return acc;
}

// rho^2(s) on the snapshot grid, from the ensemble moment scalars
std::vector<double> rho_sq_series(const CltEnsemble& e, const CovarianceModel& m,
                                  const SigmaSpec& sig, double* rho_sq_zero) {
  double kb = k_beta(m.dim, m.beta);
  std::vector<double> out(e.times.size());
  if (m.beta < m.dim) {
    for (std::size_t i = 0; i < e.times.size(); ++i) {
      double th = mean(e.mean_sigma[i]);
      out[i] = m.mu_mass() * kb * th * th;
    }
    *rho_sq_zero = m.mu_mass() * kb * sig.at_one() * sig.at_one();
  } else {
    if (m.variant == NoiseVariant::IntegrableDensity)
      throw std::invalid_argument(
          "rho series for the integrable-density regime needs full correlation "
          "snapshots; not supported by the scalar ensemble");
    for (std::size_t i = 0; i < e.times.size(); ++i)
      out[i] = kb * mean(e.mean_sigma_sq[i]);  // k_d = |B_1|, nu^2 = Psi(s,0)
    *rho_sq_zero = kb * sig.at_one() * sig.at_one();
  }
  return out;
}

}  // namespace

CovLimitResult limiting_covariance(const CltEnsemble& e, const CovarianceModel& m,
                                   const SigmaSpec& sig, double t, double r) {
  std::size_t ti = time_index(e.times, t), tj = time_index(e.times, r);
  CovLimitResult out;
  for (std::size_t k = 0; k < e.R_list.size(); ++k) {
    double R = e.R_list[k];
    double scale = std::pow(R, e.beta - 2.0 * e.dim);
    CovarianceEstimate c = covariance_with_se(e.G[k][ti], e.G[k][tj]);
    out.rows.push_back({R, scale * c.value, scale * c.std_error});
  }
  double rho0 = 0.0;
  std::vector<double> rsq = rho_sq_series(e, m, sig, &rho0);
  out.target = moment_quadrature(e.times, rsq, rho0, std::min(t, r));
  return out;
}

namespace {

bool ci_aware_decreasing(double prev, double prev_lo, double prev_hi, double cur,
                         double cur_lo, double cur_hi) {
  if (cur < prev) return true;
  return cur_lo <= prev_hi && prev_lo <= cur_hi;  // indistinguishable
}

}  // namespace

DistanceExperiment gaussian_distance(const CltEnsemble& e, double t, std::uint64_t seed) {
  std::size_t ti = time_index(e.times, t);
  DistanceExperiment out;
  std::vector<double> lx, lks, ltv;
  for (std::size_t r = 0; r < e.R_list.size(); ++r) {
    const std::vector<double>& raw = e.G[r][ti];
    double m = mean(raw), sd = std::sqrt(sample_variance(raw));
    std::vector<double> z(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) z[i] = (raw[i] - m) / sd;
    DistanceRow row;
    row.R = e.R_list[r];
    row.ks = ks_with_ci(z, seed + 2 * r);
    row.tv = tv_binned_normal(z, seed + 2 * r + 1);
    out.rows.push_back(row);
    lx.push_back(std::log(row.R));
    lks.push_back(std::log(row.ks.value));
    // keep the log defined when the corrected estimate hits the floor
    ltv.push_back(std::log(std::max(row.tv.corrected, 0.1 * row.tv.floor)));
  }
  out.ks_fit = ols_fit(lx, lks);
  out.tv_fit = ols_fit(lx, ltv);
  out.ks_decreasing = out.tv_decreasing = true;
  for (std::size_t r = 1; r < out.rows.size(); ++r) {
    const auto& p = out.rows[r - 1];
    const auto& c = out.rows[r];
    if (!ci_aware_decreasing(p.ks.value, p.ks.ci_lo, p.ks.ci_hi, c.ks.value, c.ks.ci_lo,
                             c.ks.ci_hi))
      out.ks_decreasing = false;
    if (!ci_aware_decreasing(p.tv.raw, p.tv.ci_lo, p.tv.ci_hi, c.tv.raw, c.tv.ci_lo,
                             c.tv.ci_hi))
      out.tv_decreasing = false;
  }
  return out;
}

FcltResult fclt_covariance(const CltEnsemble& e, const CovarianceModel& m,
                           const SigmaSpec& sig, double R) {
  std::size_t rk = e.R_list.size();
  for (std::size_t r = 0; r < e.R_list.size(); ++r)
    if (std::fabs(e.R_list[r] - R) < 1e-9) rk = r;
  if (rk == e.R_list.size())
    throw std::invalid_argument("fclt_covariance: R not in the ensemble");
  double scale = std::pow(R, e.beta / 2.0 - e.dim);

  FcltResult out;
  out.times = e.times;
  std::size_t nT = e.times.size();
  std::vector<std::vector<double>> scaled(nT, std::vector<double>(e.replicas));
  for (std::size_t i = 0; i < nT; ++i)
    for (int rep = 0; rep < e.replicas; ++rep)
      scaled[i][rep] = scale * e.G[rk][i][rep];

  double rho0 = 0.0;
  std::vector<double> rsq = rho_sq_series(e, m, sig, &rho0);

  out.empirical.assign(nT, std::vector<double>(nT, 0.0));
  out.target.assign(nT, std::vector<double>(nT, 0.0));
  out.std_error.assign(nT, std::vector<double>(nT, 0.0));
  out.max_rel_gap = 0.0;
  for (std::size_t i = 0; i < nT; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      CovarianceEstimate c = covariance_with_se(scaled[i], scaled[j]);
      double tgt = moment_quadrature(e.times, rsq, rho0, std::min(e.times[i], e.times[j]));
      out.empirical[i][j] = out.empirical[j][i] = c.value;
      out.std_error[i][j] = out.std_error[j][i] = c.std_error;
      out.target[i][j] = out.target[j][i] = tgt;
      double gap = std::fabs(c.value - tgt);
      if (gap > 3.0 * c.std_error)
        out.max_rel_gap = std::max(out.max_rel_gap, gap / std::fabs(tgt));
    }
  }

  // multivariate normality of the path vector
  std::vector<double> data(static_cast<std::size_t>(e.replicas) * nT);
  for (int rep = 0; rep < e.replicas; ++rep)
    for (std::size_t i = 0; i < nT; ++i)
      data[static_cast<std::size_t>(rep) * nT + i] = scaled[i][rep];
  out.mardia_p = mardia_skewness_pvalue(data, e.replicas, static_cast<int>(nT));
  return out;
}

namespace {

// |phihat_R(xi)|^2 at radius rr (finite limit |B_R|^2 at 0)
double ball_transform_sq(int d, double R, double rr) {
  double x = R * rr;
  if (x < 1e-4) {
    double vol = d == 1 ? 2.0 * R : kPi * R * R;
    return vol * vol;
  }
  return std::pow(2.0 * kPi * R, d) * std::pow(rr, -d) * bessel_j_half_order_sq(d, x);
}

}  // namespace

double additive_ball_covariance(const CovarianceModel& m, double alpha, double R,
                                double t, double r, double sigma1) {
  double tmin = std::min(t, r), gap = std::fabs(t - r);
  auto w = [&](double rr) {
    double a = std::pow(rr, alpha);
    double tf = a < 1e-14 ? tmin : std::exp(-gap * a) * (-std::expm1(-2.0 * tmin * a)) / (2.0 * a);
    return ball_transform_sq(m.dim, R, rr) * tf;
  };
  return sigma1 * sigma1 * weighted_spectral_integral(m, w, 300.0, 0.0);
}

double tightness_bound(const CovarianceModel& m, double alpha, double R, double t,
                       double s) {
  if (!(t >= s && s >= 0.0))
    throw std::invalid_argument("tightness bound: need t >= s >= 0");
  if (t == s) return 0.0;
  auto w = [&](double rr) {
    double a = std::pow(rr, alpha);
    double i1, i2;
    if (a < 1e-14) {
      i1 = 0.0;
      i2 = t - s;
    } else {
      double e1 = -std::expm1(-(t - s) * a);
      i1 = e1 * e1 * (-std::expm1(-2.0 * s * a)) / (2.0 * a);
      i2 = (-std::expm1(-2.0 * (t - s) * a)) / (2.0 * a);
    }
    return ball_transform_sq(m.dim, R, rr) * (i1 + i2);
  };
  return weighted_spectral_integral(m, w, 300.0, 0.0);
}

std::vector<TightnessRow> tightness_table(const CovarianceModel& m, double alpha,
                                          const std::vector<double>& R_list,
                                          const std::vector<std::pair<double, double>>& ts) {
  std::vector<TightnessRow> out;
  for (double R : R_list)
    for (auto [t, s] : ts) {
      TightnessRow row;
      row.R = R;
      row.t = t;
      row.s = s;
      row.value = tightness_bound(m, alpha, R, t, s);
      row.ratio = row.value / (std::pow(R, 2.0 * m.dim - m.beta) * (t - s));
      out.push_back(row);
    }
  return out;
}

}  // namespace sfh

#include "sfh/inequalities.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sfh/green.hpp"
#include "sfh/stats.hpp"

namespace sfh {

namespace {

constexpr double kPi = 3.141592653589793238462643383;

bool stable(double coarse, double refined) {
  if (!std::isfinite(coarse) || !std::isfinite(refined)) return false;
  double lo = std::min(coarse, refined), hi = std::max(coarse, refined);
  return lo > 0.0 && hi / lo < 2.0;
}

// ---- convolution inequality battery ----

// nonnegative test fields: gaussians, indicators, kernel powers
RealField test_field(const GridSpec& g, int which, double alpha, double two_q) {
  RealField f(g);
  double xy[2];
  auto radial = [&](std::size_t i) {
    g.node_coords(i, xy);
    return g.dim == 1 ? std::fabs(xy[0]) : std::hypot(xy[0], xy[1]);
  };
  auto shifted = [&](std::size_t i, double c) {
    g.node_coords(i, xy);
    double x0 = xy[0] - c, x1 = g.dim == 2 ? xy[1] : 0.0;
    return std::hypot(x0, x1);
  };
  switch (which) {
    case 0:
      for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(-radial(i) * radial(i));
      break;
    case 1:
      for (std::size_t i = 0; i < g.size(); ++i)
        f[i] = std::exp(-4.0 * radial(i) * radial(i));
      break;
    case 2:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double r = shifted(i, 1.0);
        f[i] = std::exp(-r * r / 4.0);
      }
      break;
    case 3:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double r = shifted(i, -2.0);
        f[i] = std::exp(-r * r);
      }
      break;
    case 4:
      for (std::size_t i = 0; i < g.size(); ++i) f[i] = radial(i) <= 1.0 ? 1.0 : 0.0;
      break;
    case 5:
      for (std::size_t i = 0; i < g.size(); ++i) f[i] = shifted(i, 1.5) <= 0.5 ? 1.0 : 0.0;
      break;
    case 6: {
      KernelField k = evaluate_kernel(g, alpha, 0.5);
      for (std::size_t i = 0; i < g.size(); ++i)
        f[i] = std::pow(std::max(0.0, k.field[i]), 1.0 / two_q);
      break;
    }
    default: {
      KernelField k = evaluate_kernel(g, alpha, 2.0);
      for (std::size_t i = 0; i < g.size(); ++i)
        f[i] = std::pow(std::max(0.0, k.field[i]), 1.0 / two_q);
      break;
    }
  }
  return f;
}

double lp_norm(const RealField& f, double p) {
  double acc = 0.0;
  for (double v : f.values) acc += std::pow(std::fabs(v), p);
  return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

std::vector<double> convolution_ratios(const CovarianceModel& m, double alpha,
                                       double two_q, const GridSpec& g) {
  std::vector<double> dens = grid_spectral_density(m, g);
  std::vector<RealField> fields;
  for (int i = 0; i < 8; ++i) fields.push_back(test_field(g, i, alpha, two_q));
  std::vector<double> ratios;
  for (int i = 0; i < 8 && ratios.size() < 20; ++i) {
    for (int j = i; j < 8 && ratios.size() < 20; ++j) {
      const RealField& f = fields[i];
      const RealField& h = fields[j];
      SpectralField hh = forward_transform(h);
      for (std::size_t k = 0; k < g.size(); ++k) hh.coeffs[k] *= dens[k];
      RealField conv = inverse_transform(hh, 1e-5);
      double lhs = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) lhs += f[k] * conv[k];
      lhs *= g.cell_volume();
      double rhs = lp_norm(f, two_q) * lp_norm(h, two_q);
      if (rhs > 0.0) ratios.push_back(lhs / rhs);
    }
  }
  return ratios;
}

}  // namespace

InequalityReport check_convolution_inequality(const CovarianceModel& m, double alpha,
                                              double two_q, const GridSpec& g) {
  check_admissible_two_q(g.dim, alpha, two_q);
  InequalityReport rep;
  rep.id = "convolution-holder[" + m.label() + "]";
  rep.ratios = convolution_ratios(m, alpha, two_q, g);
  rep.witness = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  GridSpec fine(g.dim, g.half_length, g.points_per_axis * 2);
  std::vector<double> fr = convolution_ratios(m, alpha, two_q, fine);
  rep.refined_witness = *std::max_element(fr.begin(), fr.end());
  rep.pass = stable(rep.witness, rep.refined_witness);
  return rep;
}

namespace {

// int G(t, x - y) |y|^{-beta} dy on a d=2 grid, cusp handled by polar
// quadrature inside radius 4 dx
double smoothing_integral(const KernelField& k, double beta, int ix) {
  const GridSpec& g = k.field.grid;
  int N = g.points_per_axis;
  double rho = 4.0 * g.dx();
  double acc = 0.0;
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node_coords(i, xy);
    double r = std::hypot(xy[0], xy[1]);
    if (r < rho) continue;
    int iy0 = static_cast<int>(i) / N, iy1 = static_cast<int>(i) % N;
    std::size_t slot = static_cast<std::size_t>(((ix - iy0) % N + N) % N) * N +
                       ((N / 2 - iy1) % N + N) % N;
    acc += k.field[slot] * std::pow(r, -beta);
  }
  acc *= g.cell_volume();
  // polar part: int_0^rho int r^{1-beta} G dr dphi, radial cusp removed by
  // the substitution u = r^{2-beta}
  double e = 2.0 - beta;
  int nr = 48, nphi = 48;
  double umax = std::pow(rho, e);
  double x0 = g.node(ix);
  double polar = 0.0;
  for (int a = 0; a < nr; ++a) {
    double u = (a + 0.5) * umax / nr;
    double r = std::pow(u, 1.0 / e);
    for (int b = 0; b < nphi; ++b) {
      double phi = 2.0 * kPi * (b + 0.5) / nphi;
      double yx = x0 - r * std::cos(phi), yy = -r * std::sin(phi);
      int j0 = static_cast<int>(std::lround((yx + g.half_length) / g.dx())) % N;
      int j1 = static_cast<int>(std::lround((yy + g.half_length) / g.dx())) % N;
      j0 = (j0 + N) % N;
      j1 = (j1 + N) % N;
      polar += k.field[static_cast<std::size_t>(j0) * N + j1];
    }
  }
  polar *= (umax / nr) * (2.0 * kPi / nphi) / e;
  return acc + polar;
}

std::vector<double> smoothing_ratios(double alpha, double beta,
                                     const std::vector<double>& t_list,
                                     const std::vector<double>& x_list, const GridSpec& g) {
  int N = g.points_per_axis;
  std::vector<double> ratios;
  for (double t : t_list) {
    KernelField k = evaluate_kernel(g, alpha, t);
    for (double x : x_list) {
      int ix = static_cast<int>(std::lround((x + g.half_length) / g.dx())) % N;
      double xs = g.node(ix);  // snapped
      double lhs = smoothing_integral(k, beta, ix);
      ratios.push_back(lhs * std::pow(std::fabs(xs), beta));
    }
  }
  return ratios;
}

}  // namespace

InequalityReport check_riesz_smoothing(double alpha, double beta,
                                       const std::vector<double>& t_list,
                                       const std::vector<double>& x_list,
                                       const GridSpec& g) {
  if (g.dim != 2)
    throw std::invalid_argument("riesz smoothing: the bound needs alpha < d, so d = 2");
  if (!(beta > 0.0 && beta < alpha && alpha < 2.0))
    throw std::invalid_argument("riesz smoothing: need 0 < beta < alpha < 2");
  for (double x : x_list)
    if (std::fabs(x) < 8.0 * g.dx() || std::fabs(x) > g.half_length / 2.0)
      throw std::invalid_argument("riesz smoothing: |x| must lie in the resolved band");
  InequalityReport rep;
  rep.id = "riesz-smoothing";
  rep.ratios = smoothing_ratios(alpha, beta, t_list, x_list, g);
  rep.witness = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  GridSpec fine(2, g.half_length, g.points_per_axis * 2);
  std::vector<double> fr = smoothing_ratios(alpha, beta, t_list, x_list, fine);
  rep.refined_witness = *std::max_element(fr.begin(), fr.end());
  rep.pass = stable(rep.witness, rep.refined_witness);
  return rep;
}

namespace {

struct GronwallRun {
  std::vector<double> t_mid;                 // midpoint time lattice
  std::vector<std::vector<double>> g_final;  // g_n at each midpoint time
  int iterations = 0;
  bool converged = false;
  bool monotone = true;
};

// one run of the recursion on the midpoint lattice tau_j = (j+1/2) dt
GronwallRun gronwall_run(const CovarianceModel& m, double alpha, const GridSpec& g,
                         double T, int nt, int n_max) {
  GronwallRun run;
  double ds = T / nt;
  for (int j = 0; j < nt; ++j) run.t_mid.push_back((j + 0.5) * ds);
  std::size_t n = g.size();
  std::vector<double> dens = grid_spectral_density(m, g);

  // G at every lattice gap and at the midpoints themselves
  std::vector<std::vector<double>> G_mid(nt);
  for (int j = 0; j < nt; ++j)
    G_mid[j] = evaluate_kernel(g, alpha, run.t_mid[j]).field.values;
  std::vector<std::vector<double>> symbol_gap(nt + 1);
  for (int gap = 1; gap <= nt; ++gap) {
    symbol_gap[gap].resize(n);
    for (std::size_t i = 0; i < n; ++i)
      symbol_gap[gap][i] = std::exp(-gap * ds * std::pow(g.wave_norm(i), alpha));
  }

  std::vector<std::vector<double>> cur = G_mid;  // g_0 = G
  double dxi_d = std::pow(g.dxi(), g.dim);
  double inv2pi_d = std::pow(2.0 * kPi, -g.dim);
  int N = g.points_per_axis;

  std::vector<cplx> work(n), shifted(n);
  for (int it = 1; it <= n_max; ++it) {
    std::vector<std::vector<double>> next(nt);
    for (int k = 0; k < nt; ++k) {
      std::vector<double> acc(n, 0.0);
      for (int j = 0; j < k; ++j) {
        // D(tau_j -> tau_k, x) via per-mode shifted convolutions
        for (std::size_t i = 0; i < n; ++i) work[i] = cplx(cur[j][i], 0.0);
        std::vector<cplx> gh = forward_transform_complex(g, work);
        const std::vector<double>& sym = symbol_gap[k - j];
        for (std::size_t mslot = 0; mslot < n; ++mslot) {
          if (dens[mslot] == 0.0) continue;
          // ghat(zeta + xi_m): cyclic mode shift per axis
          if (g.dim == 1) {
            for (std::size_t i = 0; i < n; ++i) shifted[i] = gh[(i + mslot) % n];
          } else {
            std::size_t ma = mslot / N, mb = mslot % N;
            for (std::size_t i = 0; i < n; ++i) {
              std::size_t a = i / N, b = i % N;
              shifted[i] = gh[((a + ma) % N) * N + (b + mb) % N];
            }
          }
          for (std::size_t i = 0; i < n; ++i) shifted[i] *= sym[i];
          std::vector<cplx> w = inverse_transform_complex(g, shifted);
          double wgt = inv2pi_d * dens[mslot] * dxi_d * ds;
          for (std::size_t i = 0; i < n; ++i) acc[i] += wgt * std::norm(w[i]);
        }
      }
      next[k].resize(n);
      for (std::size_t i = 0; i < n; ++i)
        next[k][i] = std::sqrt(std::max(0.0, G_mid[k][i] * G_mid[k][i] + acc[i]));
    }
    double inc = 0.0, scale = 0.0;
    for (int k = 0; k < nt; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        if (next[k][i] < cur[k][i] - 1e-12) run.monotone = false;
        inc = std::max(inc, std::fabs(next[k][i] - cur[k][i]));
        scale = std::max(scale, next[k][i]);
      }
    cur = std::move(next);
    run.iterations = it;
    if (inc < 1e-6 * scale) {
      run.converged = true;
      break;
    }
  }
  run.g_final = std::move(cur);
  return run;
}

void gronwall_witnesses(const GronwallRun& run, const GridSpec& g, double alpha,
                        double kap, double q, double two_q, int n_terms, double* series_C,
                        double* final_c) {
  // series coefficients c_j = Gamma(1-k)^j / Gamma((j+1)(1-k))
  std::vector<double> cj(n_terms + 1);
  for (int j = 0; j <= n_terms; ++j)
    cj[j] = std::exp(j * std::lgamma(1.0 - kap) - std::lgamma((j + 1) * (1.0 - kap)));
  double sC = 0.0, fc = 0.0;
  for (std::size_t k = 0; k < run.t_mid.size(); ++k) {
    double t = run.t_mid[k];
    KernelField kern = evaluate_kernel(g, alpha, t);
    double peak = *std::max_element(kern.field.values.begin(), kern.field.values.end());
    double S = 0.0;
    for (int j = 0; j <= n_terms; ++j)
      S += cj[j] * std::pow(t, j * (1.0 - kap) - kap);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double G = kern.field[i];
      if (G < 1e-6 * peak) continue;  // compare only where the kernel is resolved
      double gv = run.g_final[k][i];
      sC = std::max(sC, gv * gv / (S * std::pow(G, 1.0 / q)));
      fc = std::max(fc, gv * std::pow(t, kap / 2.0) / std::pow(G, 1.0 / two_q));
    }
  }
  *series_C = sC;
  *final_c = fc;
}

}  // namespace

GronwallReport gronwall_iteration(const CovarianceModel& m, double alpha, double two_q,
                                  int n_max, const GridSpec& g, double T, int nt) {
  check_admissible_two_q(g.dim, alpha, two_q);
  double kap = kappa_exponent(g.dim, alpha, two_q);
  if (kap >= 1.0) throw std::invalid_argument("gronwall: kappa >= 1, series invalid");
  double q = two_q / 2.0;

  GronwallReport rep;
  GronwallRun coarse = gronwall_run(m, alpha, g, T, nt, n_max);
  rep.t_grid = coarse.t_mid;
  rep.iterations_used = coarse.iterations;
  rep.converged = coarse.converged;
  rep.monotone = coarse.monotone;
  gronwall_witnesses(coarse, g, alpha, kap, q, two_q, coarse.iterations,
                     &rep.series_witness, &rep.final_witness);

  GridSpec fine(g.dim, g.half_length, g.points_per_axis * 2);
  GronwallRun refined = gronwall_run(m, alpha, fine, T, nt * 2, n_max);
  gronwall_witnesses(refined, fine, alpha, kap, q, two_q, refined.iterations,
                     &rep.refined_series_witness, &rep.refined_final_witness);

  // Gamma-coefficient ratios c_{j+1}/c_j must decrease towards zero (they
  // vanish like j^{kappa-1}, so the decay over 30 terms is gradual)
  std::vector<double> ratios;
  for (int j = 1; j <= 30; ++j)
    ratios.push_back(std::exp(std::lgamma(1.0 - kap) +
                              std::lgamma((j + 1) * (1.0 - kap)) -
                              std::lgamma((j + 2) * (1.0 - kap))));
  rep.series_summable = ratios.back() < 0.5 * ratios.front();
  for (std::size_t j = 1; j < ratios.size(); ++j)
    if (ratios[j] >= ratios[j - 1]) rep.series_summable = false;

  rep.pass = rep.converged && rep.monotone && rep.series_summable &&
             stable(rep.series_witness, rep.refined_series_witness) &&
             stable(rep.final_witness, rep.refined_final_witness);
  return rep;
}

namespace {

struct MalliavinBattery {
  std::vector<double> t_list;
  std::vector<std::size_t> x_slots;
  std::vector<double> x_offsets;
};

std::vector<double> malliavin_ratios(const SolverConfig& cfg, double r_time,
                                     double two_q, double kap, int replicas,
                                     int n_workers, const MalliavinBattery& bat) {
  const GridSpec& g = cfg.grid;
  int r_step = time_to_step(cfg, r_time);
  std::size_t z_slot = g.points_per_axis / 2;  // origin node (d = 1)
  std::size_t nb = bat.t_list.size() * bat.x_slots.size();

  // per-replica squared derivative values, reduced deterministically
  std::vector<std::vector<double>> d_sq(nb, std::vector<double>(replicas, 0.0));
  std::atomic<int> nextr{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(std::max(1, n_workers));
  for (int wk = 0; wk < std::max(1, n_workers); ++wk) {
    pool.emplace_back([&, wk] {
      try {
        for (int rep; (rep = nextr.fetch_add(1)) < replicas;) {
          Trajectory tr = derivative_field_path(cfg, rep, r_step, z_slot, bat.t_list);
          for (std::size_t ti = 0; ti < bat.t_list.size(); ++ti)
            for (std::size_t xi = 0; xi < bat.x_slots.size(); ++xi) {
              double v = tr.fields[ti][bat.x_slots[xi]];
              d_sq[ti * bat.x_slots.size() + xi][rep] = v * v;
            }
        }
      } catch (...) {
        errors[wk] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> ratios;
  for (std::size_t ti = 0; ti < bat.t_list.size(); ++ti) {
    double gap = bat.t_list[ti] - r_time;
    KernelField kern = evaluate_kernel(g, cfg.alpha, gap);
    for (std::size_t xi = 0; xi < bat.x_slots.size(); ++xi) {
      double norm2 = std::sqrt(mean(d_sq[ti * bat.x_slots.size() + xi]));
      double G = std::max(1e-300, kern.field[bat.x_slots[xi]]);
      double rhs = std::pow(gap, -kap / 2.0) * std::pow(G, 1.0 / two_q);
      ratios.push_back(norm2 / rhs);
    }
  }
  return ratios;
}

}  // namespace

InequalityReport check_malliavin_bound(const SolverConfig& cfg, double r_time,
                                       double two_q, int replicas, int n_workers) {
  if (cfg.grid.dim != 1)
    throw std::invalid_argument("malliavin battery: implemented for d = 1");
  check_admissible_two_q(cfg.grid.dim, cfg.alpha, two_q);
  double kap = kappa_exponent(cfg.grid.dim, cfg.alpha, two_q);

  MalliavinBattery bat;
  for (double t : cfg.snapshot_times)
    if (t > r_time + 1e-9) bat.t_list.push_back(t);
  if (bat.t_list.empty())
    throw std::invalid_argument("malliavin battery: no snapshot times beyond r");
  int N = cfg.grid.points_per_axis;
  for (double off : {0.0, 0.5, 1.0, 2.0}) {
    int slot = N / 2 + static_cast<int>(std::lround(off / cfg.grid.dx()));
    bat.x_slots.push_back(static_cast<std::size_t>(slot % N));
    bat.x_offsets.push_back(off);
  }

  InequalityReport rep;
  rep.id = "derivative-field-bound";
  rep.ratios = malliavin_ratios(cfg, r_time, two_q, kap, replicas, n_workers, bat);
  rep.witness = *std::max_element(rep.ratios.begin(), rep.ratios.end());

  // refinement halves dt; substep coupling keeps the same noise path when
  // the coarse config carries an even substep count
  SolverConfig fine = cfg;
  fine.dt = cfg.dt / 2.0;
  fine.noise_substeps = std::max(1, cfg.noise_substeps / 2);
  std::vector<double> fr = malliavin_ratios(fine, r_time, two_q, kap, replicas,
                                            n_workers, bat);
  rep.refined_witness = *std::max_element(fr.begin(), fr.end());
  rep.pass = stable(rep.witness, rep.refined_witness);
  return rep;
}

}  // namespace sfh

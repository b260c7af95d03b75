#include "sfh/solver.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sfh {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::vector<double> decay_factors(const GridSpec& g, double alpha, double dt) {
  std::vector<double> e(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    e[i] = std::exp(-dt * std::pow(g.wave_norm(i), alpha));
  return e;
}

}  // namespace

void validate_solver_config(const SolverConfig& cfg) {
  require(cfg.alpha > 0.0 && cfg.alpha <= 2.0, "solver: alpha must lie in (0, 2]");
  require(cfg.dt > 0.0 && cfg.dt <= cfg.T, "solver: need 0 < dt <= T");
  require(cfg.noise_substeps >= 1, "solver: noise_substeps must be >= 1");
  require(cfg.replicas >= 1, "solver: replica count must be >= 1");
  validate_model(cfg.model, cfg.alpha);
  require(cfg.model.dim == cfg.grid.dim, "solver: model and grid dimension differ");
  std::string diag;
  if (!verify_dalang(cfg.model, cfg.alpha, &diag))
    throw std::invalid_argument("solver: existence condition fails: " + diag);
  double n = cfg.T / cfg.dt;
  require(std::fabs(n - std::round(n)) < 1e-6, "solver: T must be a multiple of dt");
  // noise-per-step rule: one increment must not move the field by more than
  // ~0.25 of its O(1) scale, else the sigma(u) splitting error dominates
  std::vector<double> gam = grid_physical_covariance(cfg.model, cfg.grid);
  double gamma0 = 0.0;
  double xy[2];
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    cfg.grid.node_coords(i, xy);
    double r = cfg.grid.dim == 1 ? std::fabs(xy[0]) : std::hypot(xy[0], xy[1]);
    if (r < cfg.grid.dx()) gamma0 = std::max(gamma0, gam[i]);
  }
  double step_sd = std::fabs(cfg.sigma.at_one()) * std::sqrt(cfg.dt * gamma0);
  if (step_sd > 0.25) {
    std::ostringstream os;
    os << "solver: per-step noise standard deviation " << step_sd
       << " exceeds 0.25; decrease dt or refine the grid";
    throw std::invalid_argument(os.str());
  }
  for (double t : cfg.snapshot_times)
    require(t >= 0.0 && t <= cfg.T + 1e-12, "solver: snapshot time outside [0, T]");
}

int step_count(const SolverConfig& cfg) {
  return static_cast<int>(std::round(cfg.T / cfg.dt));
}

int time_to_step(const SolverConfig& cfg, double t) {
  int k = static_cast<int>(std::round(t / cfg.dt));
  if (std::fabs(t - k * cfg.dt) > 1e-6 * std::max(1.0, t))
    throw std::invalid_argument("time does not lie on the step lattice");
  return k;
}

RealField step_noise(const SolverConfig& cfg, int replica, int step) {
  double dts = cfg.dt / cfg.noise_substeps;
  RealField acc(cfg.grid);
  for (int j = 0; j < cfg.noise_substeps; ++j) {
    std::uint64_t sub = static_cast<std::uint64_t>(step) * cfg.noise_substeps + j;
    CounterRng stream = CounterRng::derive(cfg.master_seed, replica + 1, sub + 1);
    RealField w = sample_noise_increment(cfg.grid, cfg.model, dts, stream);
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc[i] += w[i];
  }
  return acc;
}

const RealField& Trajectory::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) < 1e-9 * std::max(1.0, t)) return fields[i];
  throw std::invalid_argument("trajectory: no snapshot at requested time");
}

namespace {

// one ensemble member, optionally recording every step's physical field
Trajectory simulate_impl(const SolverConfig& cfg, int replica,
                         std::vector<std::vector<double>>* full_history) {
  const GridSpec& g = cfg.grid;
  int n_steps = step_count(cfg);
  std::vector<double> decay = decay_factors(g, cfg.alpha, cfg.dt);

  std::vector<int> snap_steps;
  for (double t : cfg.snapshot_times) snap_steps.push_back(time_to_step(cfg, t));

  Trajectory tr;
  tr.replica = replica;

  std::vector<cplx> uhat(g.size(), cplx(0.0));
  uhat[0] = std::pow(2.0 * g.half_length, g.dim);  // u(0,.) = 1
  RealField u(g);
  for (auto& v : u.values) v = 1.0;

  auto record = [&](int step) {
    for (std::size_t s = 0; s < snap_steps.size(); ++s)
      if (snap_steps[s] == step) {
        tr.times.push_back(cfg.snapshot_times[s]);
        tr.fields.push_back(u);
      }
  };
  if (full_history) full_history->push_back(u.values);
  record(0);

  std::vector<cplx> work(g.size());
  for (int step = 0; step < n_steps; ++step) {
    RealField dw = step_noise(cfg, replica, step);
    for (std::size_t i = 0; i < g.size(); ++i)
      work[i] = cplx(cfg.sigma(u[i]) * dw[i], 0.0);
    std::vector<cplx> what = forward_transform_complex(g, work);
    for (std::size_t i = 0; i < g.size(); ++i) uhat[i] = decay[i] * (uhat[i] + what[i]);
    std::vector<cplx> phys = inverse_transform_complex(g, uhat);
    double peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      u[i] = phys[i].real();
      peak = std::max(peak, std::fabs(u[i]));
    }
    if (!(peak < 1e8)) {
      std::ostringstream os;
      os << "replica " << replica << " diverged at t = " << (step + 1) * cfg.dt
         << " (max |u| = " << peak << ")";
      throw std::runtime_error(os.str());
    }
    if (full_history) full_history->push_back(u.values);
    record(step + 1);
  }
  return tr;
}

}  // namespace

Trajectory simulate_replica(const SolverConfig& cfg, int replica) {
  validate_solver_config(cfg);
  return simulate_impl(cfg, replica, nullptr);
}

void run_ensemble(const SolverConfig& cfg, int n_workers,
                  const std::function<void(const Trajectory&)>& sink) {
  validate_solver_config(cfg);
  n_workers = std::max(1, n_workers);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r; (r = next.fetch_add(1)) < cfg.replicas;)
          sink(simulate_replica(cfg, r));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<RealField> picard_iterates(const SolverConfig& cfg, int replica,
                                       int n_iterations) {
  validate_solver_config(cfg);
  const GridSpec& g = cfg.grid;
  int n_steps = step_count(cfg);
  std::vector<double> decay = decay_factors(g, cfg.alpha, cfg.dt);

  // frozen noise path, regenerated per step from its counters
  std::vector<RealField> noise;
  noise.reserve(n_steps);
  for (int s = 0; s < n_steps; ++s) noise.push_back(step_noise(cfg, replica, s));

  std::vector<RealField> horizon;
  // u_0 = 1 at every time
  std::vector<std::vector<double>> prev(n_steps + 1,
                                        std::vector<double>(g.size(), 1.0));
  RealField u0(g);
  for (auto& v : u0.values) v = 1.0;
  horizon.push_back(u0);

  std::vector<cplx> work(g.size());
  for (int n = 1; n <= n_iterations; ++n) {
    std::vector<std::vector<double>> cur;
    cur.reserve(n_steps + 1);
    cur.push_back(std::vector<double>(g.size(), 1.0));
    std::vector<cplx> uhat(g.size(), cplx(0.0));
    uhat[0] = std::pow(2.0 * g.half_length, g.dim);
    for (int step = 0; step < n_steps; ++step) {
      // nonlinearity frozen at the previous iterate
      for (std::size_t i = 0; i < g.size(); ++i)
        work[i] = cplx(cfg.sigma(prev[step][i]) * noise[step][i], 0.0);
      std::vector<cplx> what = forward_transform_complex(g, work);
      for (std::size_t i = 0; i < g.size(); ++i) uhat[i] = decay[i] * (uhat[i] + what[i]);
      std::vector<cplx> phys = inverse_transform_complex(g, uhat);
      std::vector<double> slice(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) slice[i] = phys[i].real();
      cur.push_back(std::move(slice));
    }
    prev = std::move(cur);
    horizon.push_back(RealField(g, prev.back()));
  }
  return horizon;
}

PicardSeries picard_series_check(const CovarianceModel& m, double alpha, double iota,
                                 double p, double T, int n_terms, int nt) {
  if (p < 1.0) throw std::invalid_argument("series check: p must be >= 1");
  PicardSeries out;
  double ds = T / nt;
  out.t_grid.resize(nt + 1);
  for (int k = 0; k <= nt; ++k) out.t_grid[k] = k * ds;

  // I at cell midpoints; the s -> 0 singularity is integrable and handled by
  // a local power-law fit on the first cell
  std::vector<double> I_mid(nt);
  for (int j = 0; j < nt; ++j)
    I_mid[j] = time_kernel_spectral(m, alpha, (j + 0.5) * ds);
  double pw = 0.0, A = 0.0;
  if (nt >= 2 && I_mid[0] > 0.0 && I_mid[1] > 0.0) {
    pw = -std::log(I_mid[1] / I_mid[0]) / std::log(3.0);  // midpoints at ds/2, 3ds/2
    pw = std::min(pw, 0.95);
    A = I_mid[0] * std::pow(0.5 * ds, pw);
  }
  double first_cell_I = A > 0.0 ? A * std::pow(ds, 1.0 - pw) / (1.0 - pw) : I_mid[0] * ds;

  std::vector<double> h(nt + 1, 1.0);  // h_0
  double total = 0.0;
  for (int n = 0; n <= n_terms; ++n) {
    std::vector<double> term(nt + 1);
    for (int k = 0; k <= nt; ++k) term[k] = std::pow(std::max(0.0, h[k]), 1.0 / p);
    out.terms.push_back(term);
    total += term[nt];
    out.partial_sum_at_T.push_back(total);
    if (n == n_terms) break;
    // h_{n+1}(t_k) = iota int_0^{t_k} h_n(t_k - tau) I(tau) dtau
    std::vector<double> hn(nt + 1, 0.0);
    for (int k = 1; k <= nt; ++k) {
      // tau in the first cell: h_n nearly constant at t_k, I integrated exactly
      double acc = h[k] * first_cell_I;
      for (int j = 1; j < k; ++j) {
        // midpoint tau = (j+1/2) ds, h_n at t_k - tau interpolated linearly
        double hv = 0.5 * (h[k - j] + h[k - j - 1]);
        acc += hv * I_mid[j] * ds;
      }
      hn[k] = iota * acc;
    }
    h = std::move(hn);
  }
  out.cauchy = true;
  for (std::size_t n = 13; n < out.partial_sum_at_T.size(); ++n) {
    double inc = out.partial_sum_at_T[n] - out.partial_sum_at_T[n - 1];
    if (inc > 1e-6 * out.partial_sum_at_T.back()) out.cauchy = false;
  }
  return out;
}

Trajectory derivative_field_path(const SolverConfig& cfg, int replica, int r_step,
                                 std::size_t z_slot, const std::vector<double>& times) {
  validate_solver_config(cfg);
  const GridSpec& g = cfg.grid;
  int n_steps = step_count(cfg);
  if (r_step < 0 || r_step >= n_steps)
    throw std::invalid_argument("derivative field: r outside the step range");
  std::vector<double> decay = decay_factors(g, cfg.alpha, cfg.dt);

  std::vector<std::vector<double>> history;
  history.reserve(n_steps + 1);
  simulate_impl(cfg, replica, &history);

  Trajectory tr;
  tr.replica = replica;
  std::vector<int> want;
  for (double t : times) {
    int k = time_to_step(cfg, t);
    if (k <= r_step) throw std::invalid_argument("derivative field: time must exceed r");
    want.push_back(k);
  }

  // smoothed point-source start: Dhat(r+dt) = e^{-dt|xi|^alpha} e^{-i<xi,z>} sigma(u(r,z))
  double xy[2];
  g.node_coords(z_slot, xy);
  double s0 = cfg.sigma(history[r_step][z_slot]);
  std::vector<cplx> dhat(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double dot;
    if (g.dim == 1) {
      dot = g.wave_number(static_cast<int>(i)) * xy[0];
    } else {
      int N = g.points_per_axis;
      dot = g.wave_number(static_cast<int>(i) / N) * xy[0] +
            g.wave_number(static_cast<int>(i) % N) * xy[1];
    }
    dhat[i] = decay[i] * s0 * std::exp(cplx(0.0, -dot));
  }

  RealField d(g);
  std::vector<cplx> work(g.size());
  auto to_physical = [&] {
    std::vector<cplx> phys = inverse_transform_complex(g, dhat);
    double peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      d[i] = phys[i].real();
      peak = std::max(peak, std::fabs(d[i]));
    }
    if (!(peak < 1e8))
      throw std::runtime_error("derivative field diverged");
  };
  to_physical();
  auto record = [&](int step) {
    for (std::size_t s = 0; s < want.size(); ++s)
      if (want[s] == step) {
        tr.times.push_back(times[s]);
        tr.fields.push_back(d);
      }
  };
  record(r_step + 1);

  for (int step = r_step + 1; step < n_steps; ++step) {
    RealField dw = step_noise(cfg, replica, step);
    for (std::size_t i = 0; i < g.size(); ++i)
      work[i] = cplx(cfg.sigma.derivative(history[step][i]) * d[i] * dw[i], 0.0);
    std::vector<cplx> what = forward_transform_complex(g, work);
    for (std::size_t i = 0; i < g.size(); ++i) dhat[i] = decay[i] * (dhat[i] + what[i]);
    to_physical();
    record(step + 1);
  }
  return tr;
}

double additive_variance_target(const SolverConfig& cfg, double t) {
  int k = time_to_step(cfg, t);
  double s1 = cfg.sigma.at_one();
  double acc = 0.0;
  for (int m = 1; m <= k; ++m)
    acc += cfg.dt * time_kernel_spectral(cfg.model, cfg.alpha, m * cfg.dt);
  return s1 * s1 * acc;
}

}  // namespace sfh

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sfh/covariance.hpp"
#include "sfh/grid.hpp"
#include "sfh/sigma.hpp"

namespace sfh {

// Exponential-Euler spectral scheme for
//   du/dt = -(-Laplace)^{alpha/2} u + sigma(u) dW,  u(0,.) = 1:
// per step, uhat <- e^{-dt |xi|^alpha} [uhat + F(sigma(u) . dW)], with
// sigma evaluated at the step start (Ito/Walsh convention).
struct SolverConfig {
  double alpha = 1.5;
  double dt = 1e-3;
  double T = 0.5;
  GridSpec grid;
  SigmaSpec sigma;
  CovarianceModel model;
  int replicas = 1;
  std::uint64_t master_seed = 1;
  std::vector<double> snapshot_times;  // rounded to the step lattice
  // each dt-increment is the sum of this many sub-draws, so halving dt while
  // doubling substeps replays the identical noise path
  int noise_substeps = 1;
};

void validate_solver_config(const SolverConfig& cfg);

int step_count(const SolverConfig& cfg);
int time_to_step(const SolverConfig& cfg, double t);

// noise increment driving step `step` (0-based) of a replica
RealField step_noise(const SolverConfig& cfg, int replica, int step);

struct Trajectory {
  int replica = 0;
  std::vector<double> times;
  std::vector<RealField> fields;

  const RealField& at(double t) const;  // snapshot lookup, throws if absent
};

Trajectory simulate_replica(const SolverConfig& cfg, int replica);

// Runs all replicas on `n_workers` threads. The sink is invoked concurrently
// for distinct replicas; it must write only to replica-indexed slots.
void run_ensemble(const SolverConfig& cfg, int n_workers,
                  const std::function<void(const Trajectory&)>& sink);

// Successive fixed-point iterates u_0 = 1, u_{n+1} = step dynamics driven by
// sigma(u_n), on one frozen noise path; returns the horizon-time field of
// each iterate (u_0 .. u_n).
std::vector<RealField> picard_iterates(const SolverConfig& cfg, int replica,
                                       int n_iterations);

// Iteration-convergence series: h_0 = 1, h_n(t) = iota int_0^t h_{n-1}(s)
// I(t-s) ds, partial sums of sum h_n(t)^{1/p}.
struct PicardSeries {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> terms;  // terms[n][k] = h_n(t_k)^{1/p}
  std::vector<double> partial_sum_at_T;    // after 1, 2, ... terms
  bool cauchy = false;                     // late increments below 1e-6 of the sum
};
PicardSeries picard_series_check(const CovarianceModel& m, double alpha, double iota,
                                 double p, double T, int n_terms = 20, int nt = 200);

// Derivative field of the solution with respect to the noise at (r, z):
// starts one step after r from the kernel-smoothed point mass
// G(dt, . - z) sigma(u(r, z)) and follows the linear dynamics
// Dhat <- e^{-dt|xi|^alpha}[Dhat + F(sigma'(u) . D . dW)] on the SAME noise
// path as the trajectory.
Trajectory derivative_field_path(const SolverConfig& cfg, int replica, int r_step,
                                 std::size_t z_slot, const std::vector<double>& times);

// Scheme-matched variance of the additive-noise solution at time t:
// sum_{m=1}^{t/dt} dt * I(m dt) with I from the continuum quadrature.
double additive_variance_target(const SolverConfig& cfg, double t);

}  // namespace sfh

#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfh/green.hpp"
#include "sfh/solver.hpp"
#include "sfh/stats.hpp"

using namespace sfh;

namespace {

SolverConfig small_config() {
  SolverConfig cfg;
  cfg.alpha = 1.5;
  cfg.dt = 1e-3;
  cfg.T = 0.25;
  cfg.grid = GridSpec(1, 8.0, 256);
  cfg.sigma = sigma_constant(1.0);
  cfg.model = white_noise();
  cfg.replicas = 1;
  cfg.master_seed = 31;
  cfg.snapshot_times = {0.1, 0.25};
  return cfg;
}

}  // namespace

TEST_CASE("step bookkeeping") {
  SolverConfig cfg = small_config();
  CHECK(step_count(cfg) == 250);
  CHECK(time_to_step(cfg, 0.1) == 100);
  CHECK(time_to_step(cfg, 0.25) == 250);
}

TEST_CASE("replica simulation is deterministic") {
  SolverConfig cfg = small_config();
  Trajectory a = simulate_replica(cfg, 3);
  Trajectory b = simulate_replica(cfg, 3);
  REQUIRE(a.fields.size() == b.fields.size());
  for (std::size_t k = 0; k < a.fields.size(); ++k)
    for (std::size_t i = 0; i < a.fields[k].values.size(); ++i)
      CHECK(a.fields[k][i] == b.fields[k][i]);
}

TEST_CASE("ensemble results do not depend on the worker count") {
  SolverConfig cfg = small_config();
  cfg.replicas = 6;
  std::vector<std::vector<double>> one(6), four(6);
  run_ensemble(cfg, 1, [&](const Trajectory& t) { one[t.replica] = t.at(0.25).values; });
  run_ensemble(cfg, 4, [&](const Trajectory& t) { four[t.replica] = t.at(0.25).values; });
  for (int r = 0; r < 6; ++r) {
    REQUIRE(!one[r].empty());
    CHECK(one[r] == four[r]);
  }
}

TEST_CASE("halving dt with doubled substeps replays the identical noise path") {
  SolverConfig coarse = small_config();
  coarse.noise_substeps = 2;
  SolverConfig fine = small_config();
  fine.dt = coarse.dt / 2.0;
  fine.noise_substeps = 1;
  RealField wc = step_noise(coarse, 0, 0);
  RealField w0 = step_noise(fine, 0, 0);
  RealField w1 = step_noise(fine, 0, 1);
  for (std::size_t i = 0; i < wc.values.size(); ++i)
    CHECK(wc[i] == doctest::Approx(w0[i] + w1[i]).epsilon(1e-14));
}

TEST_CASE("additive variance matches the scheme-matched oracle") {
  SolverConfig cfg = small_config();
  cfg.replicas = 400;
  int origin = cfg.grid.points_per_axis / 2;
  std::vector<double> u_end(cfg.replicas);
  run_ensemble(cfg, 4, [&](const Trajectory& t) { u_end[t.replica] = t.at(0.25)[origin]; });
  double target = additive_variance_target(cfg, 0.25);
  VarianceEstimate v = variance_with_ci(u_end, 11);
  CHECK(std::fabs(v.value - target) < 4.0 * v.std_error);
  // mean is preserved in expectation
  CHECK(std::fabs(mean(u_end) - 1.0) < 5.0 * std::sqrt(v.value / cfg.replicas));
}

TEST_CASE("iteration scheme converges on a frozen path") {
  SolverConfig cfg = small_config();
  cfg.sigma = sigma_linear(1.0);
  std::vector<RealField> it = picard_iterates(cfg, 0, 9);
  REQUIRE(it.size() == 10);
  std::vector<double> diffs;
  for (std::size_t n = 1; n < it.size(); ++n) {
    double d = 0.0;
    for (std::size_t i = 0; i < it[n].values.size(); ++i)
      d = std::max(d, std::fabs(it[n][i] - it[n - 1][i]));
    diffs.push_back(d);
  }
  for (std::size_t n = 1; n < diffs.size(); ++n) CHECK(diffs[n] < diffs[n - 1]);
  CHECK(diffs.back() < 0.01 * diffs.front());
}

TEST_CASE("iteration-convergence series: first term closed form and summability") {
  // h_1(t) = int_0^t I(s) ds; white noise, alpha = 2, iota = 1:
  // h_1(1) = int_0^1 (2 pi)^{-1} sqrt(pi/(2s)) ds = 1/sqrt(2 pi)
  PicardSeries ps = picard_series_check(white_noise(), 2.0, 1.0, 1.0, 1.0, 10, 400);
  REQUIRE(ps.terms.size() >= 2);
  CHECK(ps.terms[1].back() == doctest::Approx(0.3989422804).epsilon(5e-3));
  CHECK(ps.cauchy);
  // partial sums increase and settle
  for (std::size_t n = 1; n < ps.partial_sum_at_T.size(); ++n)
    CHECK(ps.partial_sum_at_T[n] >= ps.partial_sum_at_T[n - 1]);
}

TEST_CASE("derivative field reduces to kernel propagation for constant sigma") {
  // sigma' = 0, so after seeding the derivative follows the free dynamics:
  // D(t, x) = sigma * G(t - r, x - z) exactly on the torus
  SolverConfig cfg = small_config();
  cfg.sigma = sigma_constant(0.7);
  int r_step = 50;
  std::size_t z = cfg.grid.points_per_axis / 2;  // z at the origin node
  Trajectory d = derivative_field_path(cfg, 0, r_step, z, {0.2});
  double elapsed = 0.2 - r_step * cfg.dt;
  KernelField k = evaluate_kernel(cfg.grid, cfg.alpha, elapsed);
  const RealField& D = d.at(0.2);
  for (std::size_t i = 0; i < D.values.size(); ++i)
    CHECK(std::fabs(D[i] - 0.7 * k.field[i]) < 1e-9);
}

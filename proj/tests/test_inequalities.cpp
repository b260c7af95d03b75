#include <cmath>

#include "doctest.h"
#include "sfh/inequalities.hpp"

using namespace sfh;

TEST_CASE("convolution inequality: finite, refinement-stable witness") {
  GridSpec g(1, 8.0, 256);
  InequalityReport r = check_convolution_inequality(white_noise(), 1.5, 2.0, g);
  CHECK(r.pass);
  CHECK(r.witness > 0.0);
  CHECK(std::isfinite(r.witness));
  double ratio = std::max(r.witness, r.refined_witness) /
                 std::min(r.witness, r.refined_witness);
  CHECK(ratio < 2.0);
  CHECK(r.ratios.size() == 20);
}

TEST_CASE("convolution inequality holds for a colored model too") {
  GridSpec g(1, 8.0, 256);
  InequalityReport r = check_convolution_inequality(riesz_kernel(1, 0.5), 1.5, 2.0, g);
  CHECK(r.pass);
}

TEST_CASE("kernel-vs-Riesz smoothing keeps the |x|^{-beta} envelope") {
  GridSpec g(2, 12.0, 256);  // resolved band 8 dx <= |x| <= L/2
  InequalityReport r = check_riesz_smoothing(1.5, 1.0, {0.5}, {1.0, 2.0}, g);
  CHECK(r.pass);
  for (double v : r.ratios) {
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("moment recursion: converged, monotone, summable majorant") {
  GronwallReport r = gronwall_iteration(riesz_kernel(1, 0.5), 1.5, 1.2, 12,
                                        GridSpec(1, 6.0, 128), 0.5, 8);
  CHECK(r.converged);
  CHECK(r.monotone);
  CHECK(r.series_summable);
  CHECK(r.pass);
  CHECK(std::isfinite(r.series_witness));
  CHECK(std::isfinite(r.final_witness));
}

TEST_CASE("derivative-field bound at reduced scale") {
  SolverConfig cfg;
  cfg.alpha = 1.5;
  cfg.dt = 5e-3;
  cfg.T = 0.3;
  cfg.grid = GridSpec(1, 8.0, 128);
  cfg.sigma = sigma_linear(0.5);
  cfg.model = riesz_kernel(1, 0.5);
  cfg.master_seed = 404;
  cfg.noise_substeps = 2;
  cfg.snapshot_times = {0.2, 0.3};
  InequalityReport r = check_malliavin_bound(cfg, 0.1, 1.2, 30, 4);
  CHECK(r.pass);
  CHECK(std::isfinite(r.witness));
}

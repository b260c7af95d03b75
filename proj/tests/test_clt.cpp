#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfh/clt.hpp"
#include "sfh/rng.hpp"

using namespace sfh;

namespace {
constexpr double kPi = 3.141592653589793238462643383;

// synthetic ensemble with exactly Gaussian ball averages:
// G_R(t) = R^{(2d-beta)/2} * sqrt(t) * Z_rep (same Z across R and t)
CltEnsemble synthetic_ensemble(int reps) {
  CltEnsemble e;
  e.R_list = {1.0, 2.0, 4.0, 8.0};
  e.times = {0.25, 0.5, 1.0};
  e.replicas = reps;
  e.beta = 0.5;
  e.dim = 1;
  CounterRng rng = CounterRng::derive(2024, 9);
  e.G.resize(e.R_list.size());
  for (std::size_t r = 0; r < e.R_list.size(); ++r) {
    e.G[r].resize(e.times.size());
    for (std::size_t ti = 0; ti < e.times.size(); ++ti) {
      e.G[r][ti].resize(reps);
      double amp = std::pow(e.R_list[r], 0.75) * std::sqrt(e.times[ti]);
      for (int k = 0; k < reps; ++k) e.G[r][ti][k] = amp * rng.normal(k);
    }
  }
  e.mean_sigma.assign(e.times.size(), std::vector<double>(reps, 1.0));
  e.mean_sigma_sq.assign(e.times.size(), std::vector<double>(reps, 1.0));
  return e;
}

}  // namespace

TEST_CASE("ball weights reproduce the ball volume") {
  GridSpec g(1, 8.0, 256);
  std::vector<double> w = ball_weights(g, 2.3);
  double total = 0.0;
  for (double v : w) total += v;
  CHECK(total * g.dx() == doctest::Approx(4.6).epsilon(1e-12));

  GridSpec g2(2, 6.0, 128);
  std::vector<double> w2 = ball_weights(g2, 2.0);
  double total2 = 0.0;
  for (double v : w2) total2 += v;
  CHECK(total2 * g2.cell_volume() == doctest::Approx(4.0 * kPi).epsilon(1e-4));
}

TEST_CASE("spatial average of constant fields") {
  GridSpec g(1, 8.0, 256);
  RealField u(g);
  for (auto& v : u.values) v = 1.0;
  CHECK(spatial_average(u, 3.0) == doctest::Approx(0.0));
  for (auto& v : u.values) v = 2.0;
  CHECK(spatial_average(u, 3.0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("variance scaling recovers the synthetic exponent") {
  CltEnsemble e = synthetic_ensemble(4000);
  VarianceScaling vs = variance_scaling(e, 0.5, 77);
  CHECK(vs.fit.slope == doctest::Approx(1.5).epsilon(0.05));
  for (const auto& v : vs.var) CHECK(v.std_error > 0.0);
}

TEST_CASE("gaussian distance is flat at the null") {
  CltEnsemble e = synthetic_ensemble(4000);
  DistanceExperiment dx = gaussian_distance(e, 0.5, 78);
  // exactly Gaussian input: KS near the sampling floor at every R
  for (const auto& row : dx.rows) CHECK(row.ks.value < 1.63 / std::sqrt(4000.0));
  for (const auto& row : dx.rows) CHECK(row.tv.corrected < 0.5 * row.tv.floor + 0.02);
}

TEST_CASE("additive ball covariance: symmetry and small-R reduction") {
  CovarianceModel m = white_noise();
  double a = additive_ball_covariance(m, 1.5, 2.0, 0.5, 0.25, 1.0);
  double b = additive_ball_covariance(m, 1.5, 2.0, 0.25, 0.5, 1.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
  CHECK(a > 0.0);
  // R -> 0: Var G_R(t) / |B_R|^2 -> Var u(t,0) = int_0^t I(s) ds
  double t = 0.5;
  double small = additive_ball_covariance(m, 2.0, 0.02, t, t, 1.0) / (0.04 * 0.04);
  // int_0^t (2 pi)^{-1} sqrt(pi/(2s)) ds = sqrt(t) / sqrt(2 pi)  (alpha = 2)
  double exact = std::sqrt(t) / std::sqrt(2.0 * kPi);
  CHECK(small == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("tightness bound behaves like the increment budget") {
  CovarianceModel m = riesz_kernel(1, 0.5);
  double k1 = tightness_bound(m, 1.5, 2.0, 0.5, 0.4);
  double k2 = tightness_bound(m, 1.5, 2.0, 0.5, 0.2);
  CHECK(k1 > 0.0);
  CHECK(k2 > k1);  // wider increment, bigger budget
  auto table = tightness_table(m, 1.5, {1.0, 2.0}, {{0.5, 0.4}, {1.0, 0.5}});
  REQUIRE(table.size() == 4);
  for (const auto& row : table) {
    CHECK(std::isfinite(row.ratio));
    CHECK(row.ratio > 0.0);
  }
}

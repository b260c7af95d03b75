#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfh/covariance.hpp"
#include "sfh/stats.hpp"

using namespace sfh;

namespace {
constexpr double kPi = 3.141592653589793238462643383;
}

TEST_CASE("Riesz Fourier-pair constant") {
  // c_{1,1/2} = sqrt(2 pi)
  CHECK(riesz_constant(1, 0.5) == doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(1e-12));
  // c_{d,beta} = 2^{d-beta} pi^{d/2} Gamma((d-beta)/2) / Gamma(beta/2)
  double c21 = std::pow(2.0, 1.0) * kPi * std::tgamma(0.5) / std::tgamma(0.5);
  CHECK(riesz_constant(2, 1.0) == doctest::Approx(c21).epsilon(1e-12));
}

TEST_CASE("structural admissibility rules") {
  CHECK_NOTHROW(validate_model(white_noise(), 1.5));
  CHECK_THROWS(validate_model(white_noise(), 1.0));  // case (ii) needs alpha > 1
  CHECK_NOTHROW(validate_model(riesz_kernel(1, 0.5), 1.5));
  CHECK_THROWS(validate_model(riesz_kernel(1, 0.9), 0.8));  // beta >= alpha
  CHECK_NOTHROW(validate_model(riesz_kernel(2, 1.0), 1.5));
  CHECK_NOTHROW(validate_model(integrable_density(1, "gaussian", 1.0), 1.5));
  CHECK_THROWS(validate_model(integrable_density(1, "no_such_density", 1.0), 1.5));
}

TEST_CASE("Dalang condition routes") {
  std::string why;
  CHECK(verify_dalang(white_noise(), 1.5));
  CHECK(verify_dalang(riesz_kernel(1, 0.5), 1.5));
  CHECK(verify_dalang(riesz_kernel(2, 1.0), 1.5));
  CHECK_FALSE(verify_dalang(riesz_kernel(1, 0.9), 0.8, &why));
  CHECK(!why.empty());
}

TEST_CASE("Upsilon closed form (white noise, alpha = 2)") {
  // (2 pi)^{-1} int dxi / (1 + 2 xi^2) = 1 / (2 sqrt 2)
  CHECK(dalang_upsilon(white_noise(), 2.0, 1.0) ==
        doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-6));
}

TEST_CASE("correlation time kernel: dual routes and closed forms") {
  // white noise, alpha = 2: I(t) = (2 pi)^{-1} sqrt(pi / (2t))
  double i1 = correlation_time_kernel(white_noise(), 2.0, 1.0);
  CHECK(i1 == doctest::Approx(std::sqrt(kPi / 2.0) / (2.0 * kPi)).epsilon(1e-4));
  // Riesz d=1, beta=1/2, alpha=3/2 at t=1/2:
  // (sqrt(2 pi)/pi) * (2/3) * Gamma(1/3) = 1.4249891...
  double ir = correlation_time_kernel(riesz_kernel(1, 0.5), 1.5, 0.5);
  CHECK(ir == doctest::Approx(1.4249891090).epsilon(5e-3));
}

TEST_CASE("white-noise spectral density is flat; indicator density is rejected") {
  GridSpec g(1, 8.0, 256);
  std::vector<double> dens = grid_spectral_density(white_noise(), g);
  for (double v : dens) CHECK(v == doctest::Approx(1.0));
  CHECK_NOTHROW(check_grid_density(integrable_density(1, "gaussian", 1.0), g));
  // the indicator transform is sinc-signed: not positive definite
  CHECK_THROWS(check_grid_density(integrable_density(1, "indicator", 1.0), g));
}

TEST_CASE("white-noise increments have cell variance dt/dx and shared CRN cells") {
  GridSpec g(1, 8.0, 256);
  double dt = 0.1;
  CounterRng stream = CounterRng::derive(99, 1, 2);
  RealField w = sample_noise_increment(g, white_noise(), dt, stream);
  std::vector<double> vals(w.values.begin(), w.values.end());
  CHECK(std::fabs(mean(vals)) < 5.0 * std::sqrt(dt / g.dx() / vals.size()));
  CHECK(sample_variance(vals) ==
        doctest::Approx(dt / g.dx()).epsilon(0.25));  // 256 cells, ~9% s.e.
  // a wider torus with the same spacing reproduces the same variates on
  // shared physical cells (position-derived counters)
  GridSpec g2(1, 16.0, 512);
  RealField w2 = sample_noise_increment(g2, white_noise(), dt, stream);
  for (int i = 0; i < g.points_per_axis; ++i) {
    int j = i + (g2.points_per_axis - g.points_per_axis) / 2;
    CHECK(w[i] == doctest::Approx(w2[j]).epsilon(1e-14));
  }
}

TEST_CASE("colored increments match the target covariance at a few lags") {
  GridSpec g(1, 8.0, 128);
  CovarianceModel m = riesz_kernel(1, 0.5);
  double dt = 0.25;
  std::vector<double> gamma = grid_physical_covariance(m, g);
  int n = 4000;
  int i0 = 40, lag = 6;
  std::vector<double> prod(n), sq(n);
  for (int r = 0; r < n; ++r) {
    RealField w = sample_noise_increment(g, m, dt, CounterRng::derive(5, r, 0));
    prod[r] = w[i0] * w[i0 + lag];
    sq[r] = w[i0] * w[i0];
  }
  // Cov(W(A), W(B)) = dt * gamma(x_A - x_B) in the cell-density normalization
  double se_p = std::sqrt(sample_variance(prod) / n);
  double se_s = std::sqrt(sample_variance(sq) / n);
  int mid = g.points_per_axis / 2;
  CHECK(std::fabs(mean(prod) - dt * gamma[mid + lag]) < 4.0 * se_p);
  CHECK(std::fabs(mean(sq) - dt * gamma[mid]) < 4.0 * se_s);
}

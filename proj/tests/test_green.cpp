#include <cmath>

#include "doctest.h"
#include "sfh/green.hpp"

using namespace sfh;

namespace {
constexpr double kPi = 3.141592653589793238462643383;
}

TEST_CASE("kernel has unit mass and known peaks") {
  // alpha = 2: heat kernel, G(1,0) = 1/sqrt(4 pi)
  GridSpec g(1, 12.0, 1024);
  KernelField k = evaluate_kernel(g, 2.0, 1.0);
  CHECK(std::fabs(k.mass - 1.0) < 1e-12);
  CHECK(k.well_resolved);
  int origin = g.points_per_axis / 2;
  CHECK(std::fabs(k.field[origin] - 0.28209479177387814) < 1e-8);

  // alpha = 1: Cauchy kernel, G(1,0) = 1/pi (heavy tails, wide torus)
  GridSpec gc(1, 200.0, 16384);
  KernelField kc = evaluate_kernel(gc, 1.0, 1.0);
  CHECK(std::fabs(kc.mass - 1.0) < 1e-12);
  CHECK(std::fabs(kc.field[gc.points_per_axis / 2] - 1.0 / kPi) < 1e-5);
}

TEST_CASE("kernel mass is exact in d=2") {
  GridSpec g(2, 10.0, 256);
  KernelField k = evaluate_kernel(g, 1.5, 0.5);
  CHECK(std::fabs(k.mass - 1.0) < 1e-12);
  // 2-d Poisson kernel peak at alpha = 1: G(1,0) = 1/(2 pi)
  GridSpec gp(2, 32.0, 4096);
  KernelField kp = evaluate_kernel(gp, 1.0, 1.0);
  std::size_t origin = static_cast<std::size_t>(gp.points_per_axis / 2) *
                           gp.points_per_axis +
                       gp.points_per_axis / 2;
  CHECK(std::fabs(kp.field[origin] - 1.0 / (2.0 * kPi)) < 1e-5);
}

TEST_CASE("semigroup and scaling identities hold to roundoff on the torus") {
  GridSpec g(1, 10.0, 512);
  for (double alpha : {1.0, 1.5, 2.0}) {
    CHECK(check_semigroup(g, alpha, 0.3, 0.7) < 1e-10);
    CHECK(check_scaling(g, alpha, 2.0) < 1e-10);
  }
  GridSpec g2(2, 8.0, 128);
  CHECK(check_semigroup(g2, 1.5, 0.2, 0.5) < 1e-10);
  CHECK(check_scaling(g2, 1.5, 2.0) < 1e-10);
}

TEST_CASE("stable tail sandwich is bounded; alpha = 2 is rejected") {
  GridSpec g(1, 48.0, 8192);
  auto [lo, hi] = tail_bound_ratio(g, 1.2);
  CHECK(lo > 0.0);
  CHECK(hi / lo < 50.0);
  CHECK_THROWS(tail_bound_ratio(g, 2.0));
}

TEST_CASE("moment-exponent bookkeeping") {
  // kappa = (2d/alpha)(1 - 1/(2q))
  CHECK(kappa_exponent(1, 1.5, 1.2) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(kappa_exponent(2, 1.5, 1.1) ==
        doctest::Approx((4.0 / 1.5) * (1.0 - 1.0 / 1.1)).epsilon(1e-12));
  // admissible window d=1, alpha=1.5: 1 < 2q < min(4, 2.5) = 2.5, open
  CHECK_NOTHROW(check_admissible_two_q(1, 1.5, 2.0));
  CHECK_THROWS(check_admissible_two_q(1, 1.5, 1.0));
  CHECK_THROWS(check_admissible_two_q(1, 1.5, 2.5));
  // d=2, alpha=1.5: upper end is min(8/5, 7/4) = 1.6
  CHECK_THROWS(check_admissible_two_q(2, 1.5, 1.7));
  CHECK_NOTHROW(check_admissible_two_q(2, 1.5, 1.15));
}

TEST_CASE("fractional-power integral scales like t^{kappa/2} (alpha = 2)") {
  // Gaussian tails make truncation negligible, so the law is clean here
  double two_q = 1.2;
  double kap = kappa_exponent(1, 2.0, two_q);
  GridSpec g(1, 20.0, 1024);
  double f1 = fractional_power_integral(g, 2.0, two_q, 1.0);
  double f2 = fractional_power_integral(g, 2.0, two_q, 2.0);
  CHECK(f2 / f1 == doctest::Approx(std::pow(2.0, kap / 2.0)).epsilon(1e-3));
}

#include <cmath>
#include <initializer_list>

#include "doctest.h"
#include "sfh/bessel.hpp"

using namespace sfh;

namespace {
constexpr double kPi = 3.141592653589793238462643383;
}

TEST_CASE("J_{1/2} closed form") {
  for (double x : {0.3, 1.0, 2.5, 10.0, 50.0}) {
    double exact = std::sqrt(2.0 / (kPi * x)) * std::sin(x);
    CHECK(bessel_j_half(x) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(bessel_j_half_order_sq(1, x) == doctest::Approx(exact * exact).epsilon(1e-10));
  }
}

TEST_CASE("J_1 reference values") {
  // Abramowitz-Stegun tabulated values
  CHECK(std::fabs(bessel_j1(1.0) - 0.4400505857449335) < 2e-8);
  CHECK(std::fabs(bessel_j1(2.0) - 0.5767248077568734) < 2e-8);
  CHECK(std::fabs(bessel_j1(5.0) - (-0.3275791375914652)) < 2e-8);
  CHECK(std::fabs(bessel_j1(10.0) - 0.0434727461688614) < 2e-8);
  CHECK(bessel_j_half_order_sq(2, 3.0) ==
        doctest::Approx(bessel_j1(3.0) * bessel_j1(3.0)).epsilon(1e-10));
}

TEST_CASE("regularized incomplete gamma") {
  // Q(1, x) = e^{-x}
  for (double x : {0.1, 1.0, 3.0}) {
    CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-9));
  }
  // Q(1/2, x) = erfc(sqrt(x))
  CHECK(gamma_q(0.5, 2.0) == doctest::Approx(std::erfc(std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("chi-square survival function") {
  CHECK(chi_square_sf(0.0, 3) == doctest::Approx(1.0));
  // P(chi^2_2 > x) = e^{-x/2}
  CHECK(chi_square_sf(4.0, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
  CHECK(chi_square_sf(5.0, 4) > chi_square_sf(6.0, 4));
}

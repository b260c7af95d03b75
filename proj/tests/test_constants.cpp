#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfh/constants.hpp"

using namespace sfh;

namespace {
constexpr double kPi = 3.141592653589793238462643383;
}

TEST_CASE("limit-constant closed forms at beta = d") {
  // k_1(1) = |B_1|^2 / ... = 2 (interval), k_2(2) = pi (disk)
  CHECK(k_beta(1, 1.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(k_beta(2, 2.0) == doctest::Approx(kPi).epsilon(1e-9));
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi));
}

TEST_CASE("limit constant: overlap and Bessel routes agree for beta < d") {
  for (auto [d, beta, ref] : {std::tuple<int, double, double>{1, 0.5, 7.5424716},
                              {2, 1.0, 16.7551608}}) {
    KBetaResult r = k_beta_routes(d, beta);
    CHECK(r.rel_gap < 5e-3);
    CHECK(r.value == doctest::Approx(ref).epsilon(5e-4));
  }
  CHECK_THROWS(k_beta_routes(1, 1.5));
  CHECK_THROWS(k_beta_routes(1, 0.0));
}

TEST_CASE("moment estimators on deterministic fields") {
  GridSpec g(1, 4.0, 64);
  RealField u(g);
  for (auto& v : u.values) v = 2.0;
  std::vector<RealField> snaps = {u, u};
  SigmaSpec lin = sigma_linear(1.0);  // sigma(u) = u
  MomentEstimate th = estimate_theta(snaps, lin);
  CHECK(th.value == doctest::Approx(2.0).epsilon(1e-12));
  MomentEstimate psi = estimate_psi(snaps, lin, 3, 0);
  CHECK(psi.value == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("limit amplitude rho from the estimated moments") {
  CovarianceModel m = riesz_kernel(1, 0.5);
  double theta = 1.3;
  CHECK(rho_value(m, theta, 0.0) ==
        doctest::Approx(std::sqrt(k_beta(1, 0.5)) * theta).epsilon(1e-10));
  CovarianceModel wn = white_noise();  // beta = d = 1
  double nu = 0.8;
  CHECK(rho_value(wn, 0.0, nu) == doctest::Approx(std::sqrt(2.0) * nu).epsilon(1e-10));
}

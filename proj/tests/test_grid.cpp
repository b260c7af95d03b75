#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfh/grid.hpp"
#include "sfh/rng.hpp"
#include "sfh/stats.hpp"

using namespace sfh;

namespace {
constexpr double kPi = 3.141592653589793238462643383;
}

TEST_CASE("forward transform matches the continuum Gaussian pair (d=1)") {
  // F[e^{-x^2}](xi) = sqrt(pi) e^{-xi^2/4}
  GridSpec g(1, 12.0, 512);
  RealField f(g);
  for (int i = 0; i < g.points_per_axis; ++i) {
    double x = g.node(i);
    f[i] = std::exp(-x * x);
  }
  SpectralField fh = forward_transform(f);
  for (int i : {0, 1, 5, 17, 40}) {
    double xi = g.wave_number(i);
    double exact = std::sqrt(kPi) * std::exp(-xi * xi / 4.0);
    CHECK(std::fabs(fh.coeffs[i].real() - exact) < 1e-8);
    CHECK(std::fabs(fh.coeffs[i].imag()) < 1e-8);
  }
}

TEST_CASE("forward transform matches the continuum Gaussian pair (d=2)") {
  // F[e^{-|x|^2}](xi) = pi e^{-|xi|^2/4}
  GridSpec g(2, 10.0, 128);
  RealField f(g);
  for (std::size_t s = 0; s < g.size(); ++s) {
    double xy[2];
    g.node_coords(s, xy);
    f[s] = std::exp(-(xy[0] * xy[0] + xy[1] * xy[1]));
  }
  SpectralField fh = forward_transform(f);
  for (std::size_t s : {std::size_t(0), std::size_t(3), std::size_t(2 * 128 + 5)}) {
    double xi = g.wave_norm(s);
    double exact = kPi * std::exp(-xi * xi / 4.0);
    CHECK(std::fabs(fh.coeffs[s].real() - exact) < 1e-8);
  }
}

TEST_CASE("transform round trip and Parseval") {
  GridSpec g(1, 8.0, 256);
  RealField f(g);
  CounterRng rng = CounterRng::derive(42, 0);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = rng.normal(i);
  RealField back = inverse_transform(forward_transform(f));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::fabs(back[i] - f[i]));
  CHECK(worst < 1e-12);
  CHECK(parseval_check(f) < 1e-10);
}

TEST_CASE("mode indexing and wave numbers") {
  GridSpec g(1, 4.0, 8);
  CHECK(g.mode_index(0) == 0);
  CHECK(g.mode_index(3) == 3);
  CHECK(g.mode_index(4) == -4);
  CHECK(g.mode_index(7) == -1);
  CHECK(g.dx() == doctest::Approx(1.0));
  CHECK(g.dxi() == doctest::Approx(kPi / 4.0));
  CHECK(g.node(0) == doctest::Approx(-4.0));
  CHECK(g.max_wave_number() == doctest::Approx(kPi));
}

TEST_CASE("counter rng is a pure function of (key, counter)") {
  CounterRng a = CounterRng::derive(123, 4, 5);
  CounterRng b = CounterRng::derive(123, 4, 5);
  CHECK(a.bits(77) == b.bits(77));
  CHECK(CounterRng::derive(123, 4, 6).bits(77) != a.bits(77));
  double z1, z2;
  a.normal_pair(9, z1, z2);
  CHECK(a.normal(9) == doctest::Approx(z1).epsilon(1e-15));
  // zig-zag is a bijection on small signed indices
  CHECK(CounterRng::zigzag(0) == 0);
  CHECK(CounterRng::zigzag(-1) == 1);
  CHECK(CounterRng::zigzag(1) == 2);
  CHECK(CounterRng::zigzag(-2) == 3);
}

TEST_CASE("normal draws have the right first two moments") {
  CounterRng rng = CounterRng::derive(7, 1);
  std::vector<double> z(20000);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.normal(i);
  CHECK(std::fabs(mean(z)) < 0.03);
  CHECK(std::fabs(sample_variance(z) - 1.0) < 0.05);
}

TEST_CASE("tree sum is deterministic and accurate") {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 / (1.0 + i);
  double s1 = tree_sum(x);
  double s2 = tree_sum(x);
  CHECK(s1 == s2);
  long double ref = 0.0L;
  for (double v : x) ref += v;
  CHECK(std::fabs(s1 - static_cast<double>(ref)) < 1e-12);
}

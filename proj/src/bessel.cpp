#include "sfh/bessel.hpp"

#include <cmath>
#include <stdexcept>

namespace sfh {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double bessel_j_half(double x) {
  double ax = std::fabs(x);
  if (ax < 1e-8) {
    // series: J_{1/2}(x) = sqrt(2x/pi) * (1 - x^2/6 + ...) / 1, via sin x / x
    double s = 1.0 - ax * ax / 6.0;
    double v = std::sqrt(2.0 * ax / kPi) * s;
    return x < 0 ? -v : v;  // odd order-1/2 continuation not used; |x| in practice
  }
  return std::sqrt(2.0 / (kPi * ax)) * std::sin(ax);
}

double bessel_j1(double x) {
  double ax = std::fabs(x);
  double ans;
  if (ax < 8.0) {
    double y = x * x;
    double r1 = x * (72362614232.0 +
                     y * (-7895059235.0 +
                          y * (242396853.1 +
                               y * (-2972611.439 + y * (15704.48260 + y * (-30.16036606))))));
    double r2 = 144725228442.0 +
                y * (2300535178.0 +
                     y * (18583304.74 + y * (99447.43394 + y * (376.9991397 + y))));
    ans = r1 / r2;
  } else {
    double z = 8.0 / ax;
    double y = z * z;
    double xx = ax - 2.356194491;
    double p1 = 1.0 + y * (0.183105e-2 +
                           y * (-0.3516396496e-4 +
                                y * (0.2457520174e-5 + y * (-0.240337019e-6))));
    double p2 = 0.04687499995 +
                y * (-0.2002690873e-3 +
                     y * (0.8449199096e-5 + y * (-0.88228987e-6 + y * 0.105787412e-6)));
    ans = std::sqrt(0.636619772 / ax) * (std::cos(xx) * p1 - z * std::sin(xx) * p2);
    if (x < 0.0) ans = -ans;
  }
  return ans;
}

double bessel_j_half_order_sq(int d, double x) {
  if (d == 1) {
    double j = bessel_j_half(std::fabs(x));
    return j * j;
  }
  if (d == 2) {
    double j = bessel_j1(x);
    return j * j;
  }
  throw std::invalid_argument("bessel_j_half_order_sq: d must be 1 or 2");
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi_square_sf(double x, int k) { return gamma_q(0.5 * k, 0.5 * x); }

}  // namespace sfh

#include "sfh/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace sfh {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = simpson(fa, fm, fb, b - a);
  return adaptive_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double integrate_simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("integrate_simpson: need n >= 2");
  if (n % 2) ++n;
  double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double integrate_power_tail(const std::function<double(double)>& f, double a, double cut,
                            double p, double tol) {
  if (p <= 1.0) throw std::invalid_argument("integrate_power_tail: tail exponent must be > 1");
  double head = integrate_adaptive(f, a, cut, tol);
  // fit c from the value at the cut: f(cut) = c * cut^{-p}
  double c = f(cut) * std::pow(cut, p);
  double tail = c * std::pow(cut, 1.0 - p) / (p - 1.0);
  return head + tail;
}

}  // namespace sfh

#include "sfh/green.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfh {

namespace {

void check_alpha_t(double alpha, double t) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("kernel: alpha must lie in (0, 2]");
  if (!(t > 0.0))
    throw std::invalid_argument("kernel: t must be positive (t = 0 is a Dirac)");
}

// spectral coefficients e^{-t |xi|^alpha}
SpectralField symbol_field(const GridSpec& g, double alpha, double t) {
  SpectralField s(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    s.coeffs[i] = std::exp(-t * std::pow(g.wave_norm(i), alpha));
  return s;
}

}  // namespace

bool kernel_well_resolved(const GridSpec& g, double alpha, double t) {
  double width = std::pow(t, 1.0 / alpha);
  if (width < 4.0 * g.dx()) return false;
  double L = g.half_length;
  // mass outside the torus: Gaussian tail for alpha = 2, the polynomial
  // stable-tail envelope ~ t |x|^{-alpha-d+d} integrated for alpha < 2
  double tail;
  if (alpha == 2.0)
    tail = std::erfc(L / (2.0 * std::sqrt(t)));
  else
    tail = 2.0 * g.dim * t * std::pow(L, -alpha) / alpha;
  return tail < 1e-6;
}

KernelField evaluate_kernel(const GridSpec& g, double alpha, double t) {
  check_alpha_t(alpha, t);
  KernelField k;
  k.alpha = alpha;
  k.t = t;
  k.field = inverse_transform(symbol_field(g, alpha, t));
  double dv = g.cell_volume();
  double mass = 0.0, neg = 0.0, peak = 0.0;
  for (double v : k.field.values) {
    mass += v * dv;
    if (v < 0.0) neg -= v * dv;
    peak = std::max(peak, v);
  }
  k.mass = mass;
  k.clipped_mass = neg;
  k.well_resolved = kernel_well_resolved(g, alpha, t);

  // invariants: tolerated ringing, symmetry
  double floor = -1e-8 * peak;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (k.field[i] < floor * 10.0 && k.well_resolved) {
      std::ostringstream os;
      os << "kernel: negative value " << k.field[i] << " beyond ringing tolerance";
      throw std::runtime_error(os.str());
    }
  return k;
}

double check_semigroup(const GridSpec& g, double alpha, double t, double s) {
  check_alpha_t(alpha, t);
  check_alpha_t(alpha, s);
  KernelField kt = evaluate_kernel(g, alpha, t);
  KernelField ks = evaluate_kernel(g, alpha, s);
  KernelField kts = evaluate_kernel(g, alpha, t + s);
  // convolution through the physical fields: transform back, multiply, invert
  SpectralField ft = forward_transform(kt.field);
  SpectralField fs = forward_transform(ks.field);
  SpectralField prod(g);
  for (std::size_t i = 0; i < g.size(); ++i) prod.coeffs[i] = ft.coeffs[i] * fs.coeffs[i];
  RealField conv = inverse_transform(prod);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::fabs(kts.field[i] - conv[i]));
  return err;
}

double check_scaling(const GridSpec& g, double alpha, double t) {
  check_alpha_t(alpha, t);
  KernelField kt = evaluate_kernel(g, alpha, t);
  double lam = std::pow(t, -1.0 / alpha);
  // G(1, .) on the grid scaled so that node i maps to lam * node i
  GridSpec unit(g.dim, g.half_length * lam, g.points_per_axis);
  KernelField k1 = evaluate_kernel(unit, alpha, 1.0);
  double peak = *std::max_element(kt.field.values.begin(), kt.field.values.end());
  double scale = std::pow(t, -static_cast<double>(g.dim) / alpha);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double lhs = kt.field[i];
    double rhs = scale * k1.field[i];
    if (std::fabs(lhs) < 1e-6 * peak && std::fabs(rhs) < 1e-6 * peak) continue;
    err = std::max(err, std::fabs(lhs - rhs) / std::max(std::fabs(lhs), std::fabs(rhs)));
  }
  return err;
}

std::pair<double, double> tail_bound_ratio(const GridSpec& g, double alpha) {
  if (alpha >= 2.0)
    throw std::invalid_argument(
        "tail_bound_ratio: polynomial tail sandwich applies to alpha < 2 only");
  if (g.half_length / 2.0 < 20.0)
    throw std::invalid_argument("tail_bound_ratio: grid must resolve |x| up to 20");
  KernelField k = evaluate_kernel(g, alpha, 1.0);
  double peak = *std::max_element(k.field.values.begin(), k.field.values.end());
  double lo = 0.0, hi = 0.0;
  bool any = false;
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node_coords(i, xy);
    double r = g.dim == 1 ? std::fabs(xy[0]) : std::hypot(xy[0], xy[1]);
    if (r < 1.0 || r > g.half_length / 2.0) continue;
    double v = k.field[i];
    if (v <= 0.0) {
      if (v < -1e-8 * peak)
        throw std::runtime_error("tail_bound_ratio: negative tail value beyond tolerance");
      continue;
    }
    double ratio = v * std::pow(1.0 + r, g.dim + alpha);
    if (!any) {
      lo = hi = ratio;
      any = true;
    } else {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  if (!any) throw std::runtime_error("tail_bound_ratio: no usable tail nodes");
  return {lo, hi};
}

double kappa_exponent(int d, double alpha, double two_q) {
  return (2.0 * d / alpha) * (1.0 - 1.0 / two_q);
}

void check_admissible_two_q(int d, double alpha, double two_q) {
  double ub1 = 2.0 * d / (2.0 * d - alpha);
  double ub2 = (d + alpha) / d;
  if (!(two_q > 1.0))
    throw std::invalid_argument("2q must exceed 1 (open interval)");
  if (!(two_q < ub1)) {
    std::ostringstream os;
    os << "2q = " << two_q << " violates 2q < 2d/(2d-alpha) = " << ub1;
    throw std::invalid_argument(os.str());
  }
  if (!(two_q < ub2)) {
    std::ostringstream os;
    os << "2q = " << two_q << " violates 2q < (d+alpha)/d = " << ub2;
    throw std::invalid_argument(os.str());
  }
}

double fractional_power_integral(const GridSpec& g, double alpha, double two_q, double t) {
  check_admissible_two_q(g.dim, alpha, two_q);
  KernelField k = evaluate_kernel(g, alpha, t);
  double p = 1.0 / two_q;
  double acc = 0.0;
  for (double v : k.field.values)
    if (v > 0.0) acc += std::pow(v, p);
  return acc * g.cell_volume();
}

}  // namespace sfh

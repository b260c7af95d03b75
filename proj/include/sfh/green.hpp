#pragma once

#include <utility>

#include "sfh/grid.hpp"

namespace sfh {

// Fundamental solution of du/dt = -(-Laplace)^{alpha/2} u, evaluated by
// spectral inversion of the symbol e^{-t |xi|^alpha} on the torus.
struct KernelField {
  double alpha = 0.0;
  double t = 0.0;
  RealField field;         // raw inversion output (ringing NOT clipped)
  double mass = 0.0;       // sum * dx^d
  double clipped_mass = 0.0;  // |sum of negative values| * dx^d
  bool well_resolved = false;
};

// "well resolved": kernel width t^{1/alpha} >= 4 dx and the mass escaping the
// torus (stable-tail estimate, Gaussian tail for alpha = 2) is below 1e-6.
bool kernel_well_resolved(const GridSpec& g, double alpha, double t);

KernelField evaluate_kernel(const GridSpec& g, double alpha, double t);

// max_x |G(t+s,x) - (G(t,.) conv G(s,.))(x)|, convolution done through the
// physical-space fields (transform -> multiply -> invert), so the identity is
// exercised end to end rather than asserted on the symbol.
double check_semigroup(const GridSpec& g, double alpha, double t, double s);

// max relative deviation of G(t,x) from t^{-d/alpha} G(1, t^{-1/alpha} x),
// the second factor evaluated on a rescaled grid so nodes align exactly.
double check_scaling(const GridSpec& g, double alpha, double t);

// (min, max) over 1 <= |x| <= L/2 of G(1,x) * (1+|x|)^{d+alpha}.
// Rejects alpha = 2: the polynomial-tail sandwich is a stable-law statement.
std::pair<double, double> tail_bound_ratio(const GridSpec& g, double alpha);

// kappa = (2d/alpha)(1 - 1/(2q))
double kappa_exponent(int d, double alpha, double two_q);

// admissible window 1 < 2q < min(2d/(2d-alpha), (d+alpha)/d), open at both
// ends; throws naming the violated bound.
void check_admissible_two_q(int d, double alpha, double two_q);

// sum G(t,.)^{1/(2q)} dx^d (negative ringing clipped at 0 before the
// fractional power); proportional to t^{kappa/2}.
double fractional_power_integral(const GridSpec& g, double alpha, double two_q, double t);

}  // namespace sfh

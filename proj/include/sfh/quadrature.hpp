#pragma once

#include <functional>

namespace sfh {

// Adaptive Simpson on [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10, int max_depth = 40);

// Composite Simpson with n (even) panels; for oscillatory integrands where
// the panel width is chosen from the oscillation period.
double integrate_simpson(const std::function<double(double)>& f, double a, double b, int n);

// \int_a^\infty f with f ~ c * x^{-p} (p > 1): adaptive up to a cut plus an
// analytic power-law tail fitted at the cut.
double integrate_power_tail(const std::function<double(double)>& f, double a, double cut,
                            double p, double tol = 1e-10);

}  // namespace sfh

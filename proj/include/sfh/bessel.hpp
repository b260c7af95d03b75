#pragma once

namespace sfh {

// Bessel functions of the first kind for the orders this project needs
// (d/2 with d = 1, 2). J_{1/2} has a closed form; J_1 uses the classical
// rational/asymptotic fits (good to ~1e-8 absolute).
double bessel_j_half(double x);
double bessel_j1(double x);

// J_{d/2}(x)^2 for d = 1 or 2.
double bessel_j_half_order_sq(int d, double x);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double x, int k);

}  // namespace sfh

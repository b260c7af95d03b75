#pragma once

#include <cstdint>
#include <string>

namespace sfh {

// Lipschitz multiplicative coefficient sigma(u) of the noise term, with an
// analytic derivative (needed by the derivative-field solver).
struct SigmaSpec {
  enum class Kind { Constant, Linear, Sine, AffineClamped };
  Kind kind = Kind::Constant;
  double a = 1.0;  // Constant: value; Linear: slope; Sine: amplitude; AffineClamped: slope
  double b = 0.0;  // Linear/AffineClamped: offset; Sine: offset
  double clamp_lo = -1e6, clamp_hi = 1e6;  // AffineClamped only

  double operator()(double u) const;
  double derivative(double u) const;
  double lipschitz_constant() const;
  double at_one() const { return (*this)(1.0); }
  std::string label() const;
};

// sigma(1) != 0 is required throughout (the fluctuations degenerate
// otherwise); factories enforce it.
SigmaSpec sigma_constant(double c);
SigmaSpec sigma_linear(double a, double b = 0.0);
// registry entries: "sine" -> a*sin(u) + b; "affine_clamped" -> clamp(a*u+b)
SigmaSpec sigma_registry(const std::string& name, double a, double b,
                         double lo = -1e6, double hi = 1e6);

// Samples n random pairs and checks |sigma(x)-sigma(y)| <= L|x-y|; throws on
// violation (guards registry entries and parameter mistakes).
void check_lipschitz(const SigmaSpec& s, std::uint64_t seed, int n = 10000);

}  // namespace sfh

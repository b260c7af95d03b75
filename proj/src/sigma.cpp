#include "sfh/sigma.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfh/rng.hpp"

namespace sfh {

double SigmaSpec::operator()(double u) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Linear:
      return a * u + b;
    case Kind::Sine:
      return a * std::sin(u) + b;
    case Kind::AffineClamped:
      return std::clamp(a * u + b, clamp_lo, clamp_hi);
  }
  return 0.0;
}

double SigmaSpec::derivative(double u) const {
  switch (kind) {
    case Kind::Constant:
      return 0.0;
    case Kind::Linear:
      return a;
    case Kind::Sine:
      return a * std::cos(u);
    case Kind::AffineClamped: {
      double v = a * u + b;
      return (v > clamp_lo && v < clamp_hi) ? a : 0.0;
    }
  }
  return 0.0;
}

double SigmaSpec::lipschitz_constant() const {
  return kind == Kind::Constant ? 0.0 : std::fabs(a);
}

std::string SigmaSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << "const(" << a << ")";
      break;
    case Kind::Linear:
      os << "linear(" << a << "u+" << b << ")";
      break;
    case Kind::Sine:
      os << "sine(" << a << "sin(u)+" << b << ")";
      break;
    case Kind::AffineClamped:
      os << "affine_clamped(" << a << "u+" << b << ")";
      break;
  }
  return os.str();
}

namespace {

SigmaSpec finalize(SigmaSpec s) {
  if (s.at_one() == 0.0)
    throw std::invalid_argument("sigma(1) must be nonzero (" + s.label() + ")");
  return s;
}

}  // namespace

SigmaSpec sigma_constant(double c) {
  SigmaSpec s;
  s.kind = SigmaSpec::Kind::Constant;
  s.a = c;
  return finalize(s);
}

SigmaSpec sigma_linear(double a, double b) {
  SigmaSpec s;
  s.kind = SigmaSpec::Kind::Linear;
  s.a = a;
  s.b = b;
  return finalize(s);
}

SigmaSpec sigma_registry(const std::string& name, double a, double b, double lo, double hi) {
  SigmaSpec s;
  if (name == "sine")
    s.kind = SigmaSpec::Kind::Sine;
  else if (name == "affine_clamped")
    s.kind = SigmaSpec::Kind::AffineClamped;
  else
    throw std::invalid_argument("unknown sigma registry entry '" + name +
                                "' (registry: sine, affine_clamped)");
  s.a = a;
  s.b = b;
  s.clamp_lo = lo;
  s.clamp_hi = hi;
  if (lo >= hi) throw std::invalid_argument("sigma clamp bounds out of order");
  return finalize(s);
}

void check_lipschitz(const SigmaSpec& s, std::uint64_t seed, int n) {
  CounterRng rng = CounterRng::derive(seed, 0x6C6970ULL);
  double L = s.lipschitz_constant();
  for (int i = 0; i < n; ++i) {
    double x = 20.0 * (rng.uniform(2 * i) - 0.5);
    double y = 20.0 * (rng.uniform(2 * i + 1) - 0.5);
    double lhs = std::fabs(s(x) - s(y));
    if (lhs > L * std::fabs(x - y) * (1.0 + 1e-9) + 1e-12) {
      std::ostringstream os;
      os << "sigma " << s.label() << " violates its Lipschitz constant " << L << " at ("
         << x << ", " << y << ")";
      throw std::runtime_error(os.str());
    }
  }
}

}  // namespace sfh

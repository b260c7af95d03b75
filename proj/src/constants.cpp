#include "sfh/constants.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfh/bessel.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/stats.hpp"

namespace sfh {

namespace {

constexpr double kPi = 3.141592653589793238462643383;

// int_{B_1^2} |x-x'|^{-beta} by quadrature in the difference coordinate
double k_beta_quadrature(int d, double beta) {
  if (d == 1) {
    // overlap length of two unit intervals at distance u: (2 - u)
    // int_{-2}^{2} (2-|u|)|u|^{-beta} du, desingularized by u = v^{1/(1-beta)}
    double e = 1.0 - beta;
    return 2.0 * integrate_adaptive(
                     [&](double v) {
                       double u = std::pow(v, 1.0 / e);
                       return (2.0 - u) / e;
                     },
                     0.0, std::pow(2.0, e), 1e-11);
  }
  // overlap area of two unit disks at distance r
  auto lens = [](double r) {
    return 2.0 * std::acos(r / 2.0) - (r / 2.0) * std::sqrt(4.0 - r * r);
  };
  // 2 pi int_0^2 A(r) r^{1-beta} dr, desingularized by r = v^{1/(2-beta)}
  double e = 2.0 - beta;
  return 2.0 * kPi *
         integrate_adaptive(
             [&](double v) {
               double r = std::pow(v, 1.0 / e);
               return lens(r) / e;
             },
             0.0, std::pow(2.0, e), 1e-11);
}

// factor * int_{R^d} |xi|^{beta-2d} J_{d/2}(|xi|)^2 dxi with the |xi| -> 0
// piece handled by the series of J and the tail by the mean-1/2 asymptotic
double k_beta_bessel(int d, double beta) {
  double factor = beta < d ? riesz_constant(d, beta) : 1.0;
  double delta = 0.1, cut = 1e3;
  double head_small;
  if (d == 1) {
    // (4/pi) xi^{beta-3} sin^2 xi ~ (4/pi)(xi^{beta-1} - xi^{beta+1}/3)
    head_small = (4.0 / kPi) * (std::pow(delta, beta) / beta -
                                std::pow(delta, beta + 2.0) / (3.0 * (beta + 2.0)));
  } else {
    // 2 pi r^{beta-3} J_1(r)^2 ~ 2 pi (r^{beta-1}/4 - r^{beta+1}/16)
    head_small = 2.0 * kPi * (std::pow(delta, beta) / (4.0 * beta) -
                              std::pow(delta, beta + 2.0) / (16.0 * (beta + 2.0)));
  }
  auto integrand = [&](double r) {
    if (d == 1) return 2.0 * std::pow(r, beta - 2.0) * bessel_j_half_order_sq(1, r);
    return 2.0 * kPi * std::pow(r, beta - 3.0) * bessel_j_half_order_sq(2, r);
  };
  int panels = static_cast<int>((cut - delta) * 32.0);
  double head = integrate_simpson(integrand, delta, cut, panels);
  double tail;
  if (d == 1)
    tail = (2.0 / kPi) * std::pow(cut, beta - 2.0) / (2.0 - beta);
  else
    tail = 2.0 * std::pow(cut, beta - 3.0) / (3.0 - beta);
  return factor * (head_small + head + tail);
}

}  // namespace

double unit_ball_volume(int d) { return d == 1 ? 2.0 : kPi; }

KBetaResult k_beta_routes(int d, double beta) {
  if (!(beta > 0.0 && beta <= d))
    throw std::invalid_argument("k_beta: need 0 < beta <= d");
  KBetaResult r;
  r.quadrature = beta < d ? k_beta_quadrature(d, beta) : unit_ball_volume(d);
  r.bessel = k_beta_bessel(d, beta);
  r.value = r.quadrature;
  r.rel_gap = std::fabs(r.quadrature - r.bessel) / r.quadrature;
  return r;
}

double k_beta(int d, double beta) {
  KBetaResult r = k_beta_routes(d, beta);
  if (r.rel_gap > 5e-3) {
    std::ostringstream os;
    os << "k_beta(d=" << d << ", beta=" << beta << "): quadrature " << r.quadrature
       << " and Bessel " << r.bessel << " routes disagree by " << r.rel_gap * 100 << "%";
    throw std::runtime_error(os.str());
  }
  return r.value;
}

namespace {

// replica-wise scalar -> estimate; single replica uses spatial ESS fallback
MomentEstimate combine(const std::vector<double>& per_replica,
                       const std::vector<double>& spatial_sample, double ess) {
  MomentEstimate e;
  e.value = mean(per_replica);
  if (per_replica.size() >= 2) {
    e.std_error = std::sqrt(sample_variance(per_replica) / per_replica.size());
  } else {
    double v = spatial_sample.size() >= 2 ? sample_variance(spatial_sample) : 0.0;
    e.std_error = std::sqrt(v / std::max(1.0, ess));
  }
  return e;
}

}  // namespace

MomentEstimate estimate_theta(const std::vector<RealField>& snaps, const SigmaSpec& sig) {
  if (snaps.empty()) throw std::invalid_argument("estimate_theta: no snapshots");
  std::vector<double> per_rep;
  std::vector<double> spatial;
  for (const auto& f : snaps) {
    std::vector<double> s(f.values.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = sig(f[i]);
    per_rep.push_back(mean(s));
    if (&f == &snaps.front()) spatial = s;
  }
  double ess = effective_sample_size(spatial);
  return combine(per_rep, spatial, ess);
}

MomentEstimate estimate_psi(const std::vector<RealField>& snaps, const SigmaSpec& sig,
                            int lag0, int lag1) {
  if (snaps.empty()) throw std::invalid_argument("estimate_psi: no snapshots");
  const GridSpec& g = snaps.front().grid;
  int N = g.points_per_axis;
  if (std::abs(lag0) >= N || std::abs(lag1) >= N)
    throw std::invalid_argument("estimate_psi: lag exceeds the grid");
  std::vector<double> per_rep;
  std::vector<double> spatial;
  for (const auto& f : snaps) {
    std::vector<double> prod(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      std::size_t j;
      if (g.dim == 1) {
        j = (i + N + lag0) % N;
      } else {
        std::size_t a = i / N, b = i % N;
        j = ((a + N + lag0) % N) * N + (b + N + lag1) % N;
      }
      prod[i] = sig(f[i]) * sig(f[j]);
    }
    per_rep.push_back(mean(prod));
    if (&f == &snaps.front()) spatial = prod;
  }
  double ess = effective_sample_size(spatial);
  return combine(per_rep, spatial, ess);
}

MomentEstimate estimate_nu_sq(const std::vector<RealField>& snaps, const SigmaSpec& sig,
                              const CovarianceModel& m) {
  if (snaps.empty()) throw std::invalid_argument("estimate_nu_sq: no snapshots");
  if (m.beta < m.dim)
    throw std::invalid_argument("nu is defined for the beta = d regimes only");
  if (m.variant == NoiseVariant::WhiteNoise) return estimate_psi(snaps, sig, 0, 0);

  // integrable density: nu^2 = int Psi(s, z) gamma(z) dz; the all-lag
  // correlation comes from one spectral pass per replica
  const GridSpec& g = snaps.front().grid;
  std::vector<double> gam = grid_physical_covariance(m, g);
  std::vector<double> per_rep;
  std::vector<double> spatial;
  double n_cells = static_cast<double>(g.size());
  for (const auto& f : snaps) {
    std::vector<cplx> s(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) s[i] = cplx(sig(f[i]), 0.0);
    std::vector<cplx> sh = forward_transform_complex(g, s);
    std::vector<cplx> power(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) power[i] = sh[i] * std::conj(sh[i]);
    // correlation(z) = (1/(2L)^d) int sig(u(x)) sig(u(x+z)) dx
    std::vector<cplx> corr = inverse_transform_complex(g, power);
    double vol = std::pow(2.0 * g.half_length, g.dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      acc += (corr[i].real() / vol) * gam[i];
    per_rep.push_back(acc * g.cell_volume());
    if (&f == &snaps.front()) {
      spatial.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) spatial[i] = sig(f[i]) * sig(f[i]);
    }
  }
  double ess = effective_sample_size(spatial);
  return combine(per_rep, spatial, ess);
}

double rho_value(const CovarianceModel& m, double theta, double nu) {
  if (m.beta < m.dim) return std::sqrt(m.mu_mass() * k_beta(m.dim, m.beta)) * theta;
  return std::sqrt(unit_ball_volume(m.dim)) * nu;
}

}  // namespace sfh

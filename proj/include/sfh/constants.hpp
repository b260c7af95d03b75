#pragma once

#include <vector>

#include "sfh/covariance.hpp"
#include "sfh/grid.hpp"
#include "sfh/sigma.hpp"

namespace sfh {

// k_beta = int_{B_1 x B_1} |x-x'|^{-beta} dx dx' (beta < d) or |B_1|
// (beta = d), computed along two independent routes:
//   quadrature: difference-coordinate integral (overlap volume x |u|^{-beta})
//   bessel:     c_{d,beta} int |xi|^{beta-2d} J_{d/2}(|xi|)^2 dxi
//               (no c factor when beta = d, where ghat_gamma = 1)
struct KBetaResult {
  double quadrature = 0.0;
  double bessel = 0.0;
  double value = 0.0;    // quadrature route (exact closed forms where known)
  double rel_gap = 0.0;  // |quadrature - bessel| / quadrature
};
KBetaResult k_beta_routes(int d, double beta);

// Dual-route value; throws if the routes disagree by more than 0.5%.
double k_beta(int d, double beta);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// All estimators take one snapshot field per replica, all at the same time,
// and exploit spatial stationarity. Standard errors come from the
// replica-to-replica spread; with a single replica they fall back to the
// spatial spread corrected by an effective sample size.

// theta(s) = E sigma(u(s, y))
MomentEstimate estimate_theta(const std::vector<RealField>& snaps, const SigmaSpec& sig);

// Psi(s, z) = E sigma(u(s,0)) sigma(u(s,z)) at a grid lag (cells, per axis)
MomentEstimate estimate_psi(const std::vector<RealField>& snaps, const SigmaSpec& sig,
                            int lag0, int lag1 = 0);

// nu(s)^2 = int Psi(s, z) mu(dz); defined for the beta = d regimes only
// (white noise: Psi(s,0); integrable density: grid quadrature against gamma)
MomentEstimate estimate_nu_sq(const std::vector<RealField>& snaps, const SigmaSpec& sig,
                              const CovarianceModel& m);

// limiting fluctuation amplitude:
//   beta < d: sqrt(mu_mass * k_beta) * theta(s)
//   beta = d: sqrt(|B_1|) * nu(s)
double rho_value(const CovarianceModel& m, double theta, double nu);

double unit_ball_volume(int d);

}  // namespace sfh

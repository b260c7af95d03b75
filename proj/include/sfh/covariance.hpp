#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sfh/grid.hpp"
#include "sfh/rng.hpp"

namespace sfh {

// Spatial covariance of the driving noise: white in time, one of three
// spatial regimes. `beta` is the homogeneity exponent of the covariance
// (gamma(cx) = c^{-beta} gamma(x) in the homogeneous case); beta = dim for
// the white-noise and integrable-density regimes.
enum class NoiseVariant { WhiteNoise, RieszKernel, IntegrableDensity };

struct PointMass {
  double weight = 1.0;
  double x0 = 0.0;
  double x1 = 0.0;
};

struct CovarianceModel {
  NoiseVariant variant = NoiseVariant::WhiteNoise;
  int dim = 1;
  double beta = 1.0;
  // Riesz regime: gamma = |.|^{-beta} * mu with mu a finite symmetric
  // mixture of point masses ({1, 0} = Dirac at the origin).
  std::vector<PointMass> mu{{1.0, 0.0, 0.0}};
  // Integrable-density regime: analytic registry entry + length scale.
  std::string density_name;
  double density_scale = 1.0;
  double r_exponent = std::numeric_limits<double>::infinity();

  double mu_mass() const;
  // Fourier transform of mu: sum w_i cos<xi, x_i> (real by symmetry)
  double mu_hat(double xi0, double xi1) const;
  std::string label() const;
};

CovarianceModel white_noise();
CovarianceModel riesz_kernel(int d, double beta,
                             std::vector<PointMass> mu = {{1.0, 0.0, 0.0}});
// names: gaussian (e^{-|x|^2/s^2}), exponential (prod e^{-|x_i|/s}),
// indicator (prod 1_{|x_i|<=s}; not positive definite -- rejected downstream
// by the spectral clip check)
CovarianceModel integrable_density(int d, const std::string& name, double scale);

// Structural admissibility rules; throws naming the violated rule.
void validate_model(const CovarianceModel& m, double alpha);

// Riesz Fourier-pair constant: |x|^{-beta} <-> c_{d,beta} |xi|^{beta-d}
double riesz_constant(int d, double beta);

// Pointwise spectral density ghat_gamma(xi). For the Riesz regime, |xi|
// below xi_floor is evaluated at xi_floor (integrable singularity).
double spectral_density_at(const CovarianceModel& m, const double* xi, double xi_floor);

// Per-FFT-mode spectral density on a grid. Singular near-zero Riesz cells
// carry their exact radial cell average (a point value there would misstate
// the cell's covariance mass). Negative values (possible only for the
// integrable-density transform) are clipped; *clip_fraction receives
// clipped mass / total mass.
std::vector<double> grid_spectral_density(const CovarianceModel& m, const GridSpec& g,
                                          double* clip_fraction = nullptr);

// Throws if the clipped spectral mass exceeds 1e-6 of the total
// (non-positive-definite density).
void check_grid_density(const CovarianceModel& m, const GridSpec& g);

// Physical covariance gamma sampled per cell (cell averages at singular
// points; white noise = 1/dx^d at the origin cell).
std::vector<double> grid_physical_covariance(const CovarianceModel& m, const GridSpec& g);

// (2pi)^{-d} int w(|xi|) ghat_gamma(xi) dxi as a radial quadrature (angular
// average for d = 2, Riesz singularity removed by substitution), integrated
// up to `cut` plus an analytic `tail` supplied by the caller.
double weighted_spectral_integral(const CovarianceModel& m,
                                  const std::function<double(double)>& w, double cut,
                                  double tail);

// Upsilon(lambda) = (2pi)^{-d} int ghat_gamma(xi) / (lambda + 2|xi|^alpha) dxi
double dalang_upsilon(const CovarianceModel& m, double alpha, double lambda);

// I(t) = (2pi)^{-d} int e^{-2t|xi|^alpha} ghat_gamma(xi) dxi, by direct
// quadrature of the continuum integral.
double time_kernel_spectral(const CovarianceModel& m, double alpha, double t);

struct TimeKernelResult {
  double spectral = 0.0;  // continuum quadrature
  double physical = 0.0;  // double convolution of the kernel with gamma
};
TimeKernelResult time_kernel_routes(const CovarianceModel& m, double alpha, double t,
                                    const GridSpec& g);

// Both routes, enforced to agree to 0.5%; returns the spectral value.
double correlation_time_kernel(const CovarianceModel& m, double alpha, double t);

// One Gaussian noise increment on the grid (density of W([t,t+dt] x cell)).
// White noise is drawn per physical cell with position-derived counters
// (grids of equal spacing share variates on common cells); the colored
// regimes are drawn spectrally with Hermitian pairing.
RealField sample_noise_increment(const GridSpec& g, const CovarianceModel& m, double dt,
                                 const CounterRng& stream);

bool verify_dalang(const CovarianceModel& m, double alpha, std::string* diagnostic = nullptr);

}  // namespace sfh

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sfh {

using cplx = std::complex<double>;

// Periodic torus [-L, L)^d, d = 1 or 2, with N points per axis.
// Wave vectors are xi_k = pi*k/L for k in {-N/2, ..., N/2-1} (FFT ordering).
// The transform pair is calibrated to the continuum Fourier transform
//   fhat(xi) = \int e^{-i<xi,y>} f(y) dy,
// i.e. forward = dx^d * DFT (with the -L origin phase folded in), and the
// inverse carries the (2pi)^{-d} together with the dxi^d mode weight.
struct GridSpec {
  int dim = 1;
  double half_length = 0.0;  // L
  int points_per_axis = 0;   // N, power of two

  GridSpec() = default;
  GridSpec(int d, double L, int N);

  double dx() const { return 2.0 * half_length / points_per_axis; }
  double dxi() const { return pi() / half_length; }
  std::size_t size() const;
  double cell_volume() const;

  // signed mode index for FFT slot i: i < N/2 ? i : i - N
  int mode_index(int i) const {
    return i < points_per_axis / 2 ? i : i - points_per_axis;
  }
  double node(int i) const { return -half_length + i * dx(); }
  double wave_number(int i) const { return mode_index(i) * dxi(); }
  // |xi| of flat FFT slot (d=1: slot = i; d=2: slot = i*N + j, row-major)
  double wave_norm(std::size_t slot) const;
  // node coordinates of flat slot
  void node_coords(std::size_t slot, double* xy) const;

  double max_wave_number() const { return points_per_axis / 2 * dxi(); }

  bool operator==(const GridSpec& o) const = default;

  static double pi();
};

struct RealField {
  GridSpec grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}
  RealField(const GridSpec& g, std::vector<double> v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct SpectralField {
  GridSpec grid;
  std::vector<cplx> coeffs;  // FFT slot order

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g) : grid(g), coeffs(g.size()) {}
};

// Continuum-calibrated transforms. Pure, thread-safe (per-thread FFT plans).
SpectralField forward_transform(const RealField& f);
RealField inverse_transform(const SpectralField& c, double hermitian_tol = 1e-8);

// Complex-valued helpers for internal spectral work (no Hermitian check).
std::vector<cplx> forward_transform_complex(const GridSpec& g, std::span<const cplx> f);
std::vector<cplx> inverse_transform_complex(const GridSpec& g, std::span<const cplx> c);

// |sum f^2 dx^d - (2pi)^{-d} sum |fhat|^2 dxi^d| / sum f^2 dx^d  (0 for f = 0)
double parseval_check(const RealField& f);

}  // namespace sfh

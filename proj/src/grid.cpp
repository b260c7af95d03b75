#include "sfh/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace sfh {

double GridSpec::pi() { return 3.141592653589793238462643383279502884; }

GridSpec::GridSpec(int d, double L, int N) : dim(d), half_length(L), points_per_axis(N) {
  if (d != 1 && d != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
  if (!(L > 0.0)) throw std::invalid_argument("GridSpec: half_length must be positive");
  if (N < 2 || (N & (N - 1)) != 0)
    throw std::invalid_argument("GridSpec: points_per_axis must be a power of two >= 2");
}

std::size_t GridSpec::size() const {
  std::size_t n = static_cast<std::size_t>(points_per_axis);
  return dim == 1 ? n : n * n;
}

double GridSpec::cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }

double GridSpec::wave_norm(std::size_t slot) const {
  if (dim == 1) return std::abs(wave_number(static_cast<int>(slot)));
  int i = static_cast<int>(slot) / points_per_axis;
  int j = static_cast<int>(slot) % points_per_axis;
  double a = wave_number(i), b = wave_number(j);
  return std::hypot(a, b);
}

void GridSpec::node_coords(std::size_t slot, double* xy) const {
  if (dim == 1) {
    xy[0] = node(static_cast<int>(slot));
  } else {
    xy[0] = node(static_cast<int>(slot) / points_per_axis);
    xy[1] = node(static_cast<int>(slot) % points_per_axis);
  }
}

RealField::RealField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw std::invalid_argument("RealField: size mismatch");
}

namespace {

// FFTW plans keyed by (dim, N); plan creation is serialized, execution with
// explicit buffers (new-array execute) is thread safe.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~PlanPair() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

std::mutex plan_mutex;
std::map<std::pair<int, int>, std::shared_ptr<PlanPair>> plan_cache;

std::shared_ptr<PlanPair> get_plans(const GridSpec& g) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(g.dim, g.points_per_axis);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;

  auto p = std::make_shared<PlanPair>();
  std::size_t n = g.size();
  fftw_complex* buf = fftw_alloc_complex(n);
  int N = g.points_per_axis;
  if (g.dim == 1) {
    p->fwd = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p->bwd = fftw_plan_dft_1d(N, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  } else {
    p->fwd = fftw_plan_dft_2d(N, N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p->bwd = fftw_plan_dft_2d(N, N, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_free(buf);
  plan_cache.emplace(key, p);
  return p;
}

void run_fft(const GridSpec& g, std::vector<cplx>& data, bool forward) {
  auto plans = get_plans(g);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(forward ? plans->fwd : plans->bwd, ptr, ptr);
}

// (-1)^{k1+k2+...} phase from the -L grid origin, slot-wise
inline int slot_parity(const GridSpec& g, std::size_t slot) {
  if (g.dim == 1) return static_cast<int>(slot) & 1;
  int i = static_cast<int>(slot) / g.points_per_axis;
  int j = static_cast<int>(slot) % g.points_per_axis;
  return (i + j) & 1;
}

}  // namespace

std::vector<cplx> forward_transform_complex(const GridSpec& g, std::span<const cplx> f) {
  std::vector<cplx> data(f.begin(), f.end());
  run_fft(g, data, true);
  double scale = g.cell_volume();
  for (std::size_t s = 0; s < data.size(); ++s)
    data[s] *= slot_parity(g, s) ? -scale : scale;
  return data;
}

std::vector<cplx> inverse_transform_complex(const GridSpec& g, std::span<const cplx> c) {
  std::vector<cplx> data(c.size());
  double base = std::pow(g.dxi() / (2.0 * GridSpec::pi()), g.dim);
  for (std::size_t s = 0; s < data.size(); ++s)
    data[s] = c[s] * (slot_parity(g, s) ? -base : base);
  run_fft(g, data, false);
  return data;
}

SpectralField forward_transform(const RealField& f) {
  for (double v : f.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("forward_transform: non-finite input value");
  std::vector<cplx> in(f.values.begin(), f.values.end());
  SpectralField out(f.grid);
  out.coeffs = forward_transform_complex(f.grid, in);
  return out;
}

RealField inverse_transform(const SpectralField& c, double hermitian_tol) {
  auto data = inverse_transform_complex(c.grid, c.coeffs);
  double max_abs = 0.0, max_im = 0.0;
  for (const cplx& z : data) {
    max_abs = std::max(max_abs, std::abs(z));
    max_im = std::max(max_im, std::abs(z.imag()));
  }
  if (max_abs > 0.0 && max_im > hermitian_tol * max_abs)
    throw std::invalid_argument("inverse_transform: coefficients not Hermitian-symmetric");
  RealField out(c.grid);
  for (std::size_t i = 0; i < data.size(); ++i) out.values[i] = data[i].real();
  return out;
}

double parseval_check(const RealField& f) {
  double phys = 0.0;
  for (double v : f.values) phys += v * v;
  phys *= f.grid.cell_volume();
  if (phys == 0.0) return 0.0;

  auto c = forward_transform(f);
  double spec = 0.0;
  for (const cplx& z : c.coeffs) spec += std::norm(z);
  spec *= std::pow(f.grid.dxi() / (2.0 * GridSpec::pi()), f.grid.dim);
  return std::abs(phys - spec) / phys;
}

}  // namespace sfh

#include "sfh/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "sfh/green.hpp"
#include "sfh/quadrature.hpp"

namespace sfh {

namespace {

constexpr double kPi = 3.141592653589793238462643383;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double CovarianceModel::mu_mass() const {
  double s = 0.0;
  for (const auto& p : mu) s += p.weight;
  return s;
}

double CovarianceModel::mu_hat(double xi0, double xi1) const {
  double s = 0.0;
  for (const auto& p : mu) s += p.weight * std::cos(xi0 * p.x0 + xi1 * p.x1);
  return s;
}

std::string CovarianceModel::label() const {
  std::ostringstream os;
  switch (variant) {
    case NoiseVariant::WhiteNoise:
      os << "white-noise";
      break;
    case NoiseVariant::RieszKernel:
      os << "riesz(d=" << dim << ",beta=" << beta << ")";
      break;
    case NoiseVariant::IntegrableDensity:
      os << density_name << "(d=" << dim << ",scale=" << density_scale << ")";
      break;
  }
  return os.str();
}

CovarianceModel white_noise() {
  CovarianceModel m;
  m.variant = NoiseVariant::WhiteNoise;
  m.dim = 1;
  m.beta = 1.0;
  return m;
}

CovarianceModel riesz_kernel(int d, double beta, std::vector<PointMass> mu) {
  CovarianceModel m;
  m.variant = NoiseVariant::RieszKernel;
  m.dim = d;
  m.beta = beta;
  m.mu = std::move(mu);
  return m;
}

CovarianceModel integrable_density(int d, const std::string& name, double scale) {
  CovarianceModel m;
  m.variant = NoiseVariant::IntegrableDensity;
  m.dim = d;
  m.beta = static_cast<double>(d);
  m.density_name = name;
  m.density_scale = scale;
  return m;
}

void validate_model(const CovarianceModel& m, double alpha) {
  require(m.dim == 1 || m.dim == 2, "noise model: dim must be 1 or 2");
  require(alpha > 0.0 && alpha <= 2.0, "noise model: alpha must lie in (0, 2]");
  switch (m.variant) {
    case NoiseVariant::WhiteNoise:
      require(m.dim == 1, "white noise in space requires d = 1");
      require(alpha > 1.0, "white noise in space requires alpha > 1");
      break;
    case NoiseVariant::RieszKernel: {
      require(m.beta > 0.0 && m.beta < std::min(alpha, static_cast<double>(m.dim)),
              "riesz regime requires 0 < beta < min(alpha, d)");
      require(!m.mu.empty(), "riesz regime: tempering measure mu is empty");
      for (const auto& p : m.mu) {
        require(p.weight > 0.0, "riesz regime: mu weights must be positive");
        // symmetry: a matching mass at -x must exist
        bool found = false;
        for (const auto& q : m.mu)
          if (std::fabs(q.x0 + p.x0) < 1e-12 && std::fabs(q.x1 + p.x1) < 1e-12 &&
              std::fabs(q.weight - p.weight) < 1e-12)
            found = true;
        require(found, "riesz regime: mu must be symmetric (mass at -x missing)");
      }
      break;
    }
    case NoiseVariant::IntegrableDensity:
      require(m.r_exponent > m.dim / alpha,
              "integrable-density regime requires integrability exponent r > d/alpha");
      require(m.density_name == "gaussian" || m.density_name == "exponential" ||
                  m.density_name == "indicator",
              "unknown covariance density '" + m.density_name +
                  "' (registry: gaussian, exponential, indicator)");
      require(m.density_scale > 0.0, "covariance density scale must be positive");
      break;
  }
}

double riesz_constant(int d, double beta) {
  return std::pow(2.0, d - beta) * std::pow(kPi, d / 2.0) *
         std::tgamma((d - beta) / 2.0) / std::tgamma(beta / 2.0);
}

namespace {

// physical-space density of the integrable regime at x
double density_gamma(const CovarianceModel& m, double x0, double x1) {
  double s = m.density_scale;
  if (m.density_name == "gaussian") return std::exp(-(x0 * x0 + x1 * x1) / (s * s));
  if (m.density_name == "exponential") {
    double v = std::exp(-std::fabs(x0) / s);
    if (m.dim == 2) v *= std::exp(-std::fabs(x1) / s);
    return v;
  }
  // indicator
  double v = std::fabs(x0) <= s ? 1.0 : 0.0;
  if (m.dim == 2) v *= std::fabs(x1) <= s ? 1.0 : 0.0;
  return v;
}

double sinc_transform(double s, double xi) {
  return xi == 0.0 ? 2.0 * s : 2.0 * std::sin(s * xi) / xi;
}

// closed-form Fourier transform of the integrable-density gamma (may be
// signed for the indicator entry)
double density_gamma_hat(const CovarianceModel& m, double xi0, double xi1) {
  double s = m.density_scale;
  if (m.density_name == "gaussian") {
    double r2 = xi0 * xi0 + xi1 * xi1;
    return std::pow(s * std::sqrt(kPi), m.dim) * std::exp(-s * s * r2 / 4.0);
  }
  if (m.density_name == "exponential") {
    double v = 2.0 * s / (1.0 + s * s * xi0 * xi0);
    if (m.dim == 2) v *= 2.0 * s / (1.0 + s * s * xi1 * xi1);
    return v;
  }
  double v = sinc_transform(s, xi0);
  if (m.dim == 2) v *= sinc_transform(s, xi1);
  return v;
}

// pointwise spectral density away from the Riesz singularity (no clipping)
double density_point(const CovarianceModel& m, double xi0, double xi1) {
  switch (m.variant) {
    case NoiseVariant::WhiteNoise:
      return 1.0;
    case NoiseVariant::RieszKernel: {
      double r = m.dim == 1 ? std::fabs(xi0) : std::hypot(xi0, xi1);
      return riesz_constant(m.dim, m.beta) * std::pow(r, m.beta - m.dim) *
             m.mu_hat(xi0, xi1);
    }
    case NoiseVariant::IntegrableDensity:
      return std::max(0.0, density_gamma_hat(m, xi0, xi1));
  }
  return 0.0;
}

// angular average of ghat_mu (d=2) at radius r; trivially ghat_mu(r) for d=1
double angular_mu_hat(const CovarianceModel& m, double r) {
  if (m.dim == 1) return m.mu_hat(r, 0.0);
  int n = 128;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double phi = 2.0 * kPi * (i + 0.5) / n;
    acc += m.mu_hat(r * std::cos(phi), r * std::sin(phi));
  }
  return acc / n;
}

// angular average of the full spectral density at radius r (Riesz singular
// factor included), used by the radial quadratures
double angular_density(const CovarianceModel& m, double r) {
  switch (m.variant) {
    case NoiseVariant::WhiteNoise:
      return 1.0;
    case NoiseVariant::RieszKernel:
      return riesz_constant(m.dim, m.beta) * std::pow(r, m.beta - m.dim) *
             angular_mu_hat(m, r);
    case NoiseVariant::IntegrableDensity: {
      if (m.dim == 1) return std::max(0.0, density_gamma_hat(m, r, 0.0));
      int n = 128;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        double phi = 2.0 * kPi * (i + 0.5) / n;
        acc += std::max(0.0, density_gamma_hat(m, r * std::cos(phi), r * std::sin(phi)));
      }
      return acc / n;
    }
  }
  return 0.0;
}

}  // namespace

// Radial head integrated in geometric segments up to `cut`; the Riesz
// singularity on [0, 1] is removed by the substitution r = u^{1/beta}.
double weighted_spectral_integral(const CovarianceModel& m,
                                  const std::function<double(double)>& w, double cut,
                                  double tail) {
  int d = m.dim;
  // radial measure factor: d=1 has both half-lines, d=2 has the 2*pi*r ring
  double norm = d == 1 ? 2.0 / (2.0 * kPi) : 2.0 * kPi / ((2.0 * kPi) * (2.0 * kPi));
  auto integrand = [&](double r) {
    double ring = d == 1 ? 1.0 : r;
    return ring * angular_density(m, r) * w(r);
  };
  double acc = 0.0;
  double a = 0.0;
  if (m.variant == NoiseVariant::RieszKernel) {
    // near 0 the integrand is c r^{beta-1} * avg(ghat_mu) * w; substitute
    double b = m.beta;
    double c = riesz_constant(d, b);
    acc += integrate_adaptive(
        [&](double u) {
          double r = std::pow(u, 1.0 / b);
          return (c / b) * angular_mu_hat(m, r) * w(r);
        },
        0.0, 1.0, 1e-11);
    a = 1.0;
  }
  double seg = std::max(1.0, a);
  while (a < cut) {
    double bnd = std::min(cut, a + seg);
    acc += integrate_adaptive(integrand, a, bnd, 1e-11);
    a = bnd;
    seg *= 2.0;
  }
  return norm * acc + tail;
}

double spectral_density_at(const CovarianceModel& m, const double* xi, double xi_floor) {
  double xi0 = xi[0], xi1 = m.dim == 2 ? xi[1] : 0.0;
  if (m.variant == NoiseVariant::RieszKernel) {
    double r = m.dim == 1 ? std::fabs(xi0) : std::hypot(xi0, xi1);
    if (r < xi_floor) {
      // regularized point value: singular radial factor frozen at xi_floor
      return riesz_constant(m.dim, m.beta) * std::pow(xi_floor, m.beta - m.dim) *
             m.mu_hat(xi0, xi1);
    }
  }
  return density_point(m, xi0, xi1);
}

std::vector<double> grid_spectral_density(const CovarianceModel& m, const GridSpec& g,
                                          double* clip_fraction) {
  if (m.dim != g.dim) throw std::invalid_argument("grid_spectral_density: dim mismatch");
  std::vector<double> out(g.size(), 0.0);
  double clipped = 0.0, total = 0.0;

  if (m.variant == NoiseVariant::IntegrableDensity) {
    // transform the sampled physical density; clip negative modes
    RealField gam(g);
    double xy[2];
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.node_coords(i, xy);
      gam[i] = density_gamma(m, xy[0], m.dim == 2 ? xy[1] : 0.0);
    }
    SpectralField sp = forward_transform(gam);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double v = sp.coeffs[i].real();
      if (v < 0.0) {
        clipped += -v;
        v = 0.0;
      }
      total += std::fabs(sp.coeffs[i].real());
      out[i] = v;
    }
  } else {
    double dxi = g.dxi();
    for (std::size_t i = 0; i < g.size(); ++i) {
      double r = g.wave_norm(i);
      if (m.variant == NoiseVariant::RieszKernel && r < 1.5 * dxi) {
        // exact radial cell average of c |xi|^{beta-d} over the mode's cell
        // (area-equivalent disk for d=2) times the smooth ghat_mu factor
        double b = m.beta, c = riesz_constant(m.dim, b);
        double avg;
        if (m.dim == 1) {
          if (r < 0.5 * dxi) {
            double h = dxi / 2.0;
            avg = c * std::pow(h, b - 1.0) / b;
          } else {
            // off-center singular-adjacent cell: exact 1d average
            double lo = r - dxi / 2.0, hi = r + dxi / 2.0;
            avg = c * (std::pow(hi, b) - std::pow(lo, b)) / (b * dxi);
          }
        } else {
          if (r < 0.5 * dxi) {
            double r0 = dxi / std::sqrt(kPi);
            avg = c * 2.0 * kPi * std::pow(r0, b) / (b * dxi * dxi);
          } else {
            avg = c * std::pow(r, b - 2.0);
          }
        }
        double xi0 = g.wave_number(m.dim == 1 ? static_cast<int>(i)
                                              : static_cast<int>(i) / g.points_per_axis);
        double xi1 =
            m.dim == 2 ? g.wave_number(static_cast<int>(i) % g.points_per_axis) : 0.0;
        out[i] = avg * m.mu_hat(xi0, xi1);
        if (out[i] < 0.0) {
          clipped += -out[i];
          out[i] = 0.0;
        }
        total += std::fabs(avg * m.mu_mass());
      } else {
        double xy[2] = {0.0, 0.0};
        if (m.dim == 1) {
          xy[0] = g.wave_number(static_cast<int>(i));
        } else {
          xy[0] = g.wave_number(static_cast<int>(i) / g.points_per_axis);
          xy[1] = g.wave_number(static_cast<int>(i) % g.points_per_axis);
        }
        double v = density_point(m, xy[0], xy[1]);
        if (v < 0.0) {
          clipped += -v;
          v = 0.0;
        }
        total += std::fabs(v);
        out[i] = v;
      }
    }
  }
  if (clip_fraction) *clip_fraction = total > 0.0 ? clipped / total : 0.0;
  return out;
}

void check_grid_density(const CovarianceModel& m, const GridSpec& g) {
  double clip = 0.0;
  grid_spectral_density(m, g, &clip);
  if (clip > 1e-6) {
    std::ostringstream os;
    os << "covariance model " << m.label() << ": spectral density not nonnegative "
       << "(clipped mass fraction " << clip << " > 1e-6)";
    throw std::invalid_argument(os.str());
  }
}

std::vector<double> grid_physical_covariance(const CovarianceModel& m, const GridSpec& g) {
  if (m.dim != g.dim) throw std::invalid_argument("grid_physical_covariance: dim mismatch");
  std::vector<double> out(g.size(), 0.0);
  double dx = g.dx();
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node_coords(i, xy);
    double x0 = xy[0], x1 = m.dim == 2 ? xy[1] : 0.0;
    switch (m.variant) {
      case NoiseVariant::WhiteNoise:
        out[i] = (std::fabs(x0) < dx / 2.0) ? 1.0 / dx : 0.0;
        break;
      case NoiseVariant::RieszKernel: {
        double acc = 0.0;
        for (const auto& p : m.mu) {
          double u0 = x0 - p.x0, u1 = x1 - p.x1;
          double r = m.dim == 1 ? std::fabs(u0) : std::hypot(u0, u1);
          if (r < dx / 2.0) {
            // cell average of |u|^{-beta} over the singular cell
            if (m.dim == 1) {
              double h = dx / 2.0;
              acc += p.weight * std::pow(h, -m.beta) / (1.0 - m.beta);
            } else {
              double r0 = dx / std::sqrt(kPi);
              acc += p.weight * 2.0 * kPi * std::pow(r0, 2.0 - m.beta) /
                     ((2.0 - m.beta) * dx * dx);
            }
          } else {
            acc += p.weight * std::pow(r, -m.beta);
          }
        }
        out[i] = acc;
        break;
      }
      case NoiseVariant::IntegrableDensity:
        out[i] = density_gamma(m, x0, x1);
        break;
    }
  }
  return out;
}

double dalang_upsilon(const CovarianceModel& m, double alpha, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("dalang_upsilon: lambda must be positive");
  std::string diag;
  if (!verify_dalang(m, alpha, &diag))
    throw std::invalid_argument("dalang_upsilon diverges: " + diag);
  double cut = 1e4;
  // analytic tail with |ghat_mu| <= mass and lambda + 2r^alpha ~ 2r^alpha
  double tail = 0.0;
  int d = m.dim;
  switch (m.variant) {
    case NoiseVariant::WhiteNoise:
      tail = std::pow(cut, 1.0 - alpha) / (alpha - 1.0) / (2.0 * kPi);
      break;
    case NoiseVariant::RieszKernel: {
      double c = riesz_constant(d, m.beta) * m.mu_mass();
      double norm = d == 1 ? 1.0 / kPi : 1.0 / (2.0 * kPi);
      tail = norm * c * std::pow(cut, m.beta - alpha) / (2.0 * (alpha - m.beta));
      break;
    }
    case NoiseVariant::IntegrableDensity:
      tail = 0.0;  // transform decays at least like r^{-2} for the registry
      break;
  }
  return weighted_spectral_integral(
      m, [&](double r) { return 1.0 / (lambda + 2.0 * std::pow(r, alpha)); }, cut, tail);
}

double time_kernel_spectral(const CovarianceModel& m, double alpha, double t) {
  if (t <= 0.0) throw std::invalid_argument("time kernel: t must be positive");
  // e^{-2 t r^alpha} < e^{-40} beyond the cut; tail negligible
  double cut = std::max(4.0, std::pow(20.0 / t, 1.0 / alpha));
  return weighted_spectral_integral(
      m, [&](double r) { return std::exp(-2.0 * t * std::pow(r, alpha)); }, cut, 0.0);
}

TimeKernelResult time_kernel_routes(const CovarianceModel& m, double alpha, double t,
                                    const GridSpec& g) {
  TimeKernelResult res;
  res.spectral = time_kernel_spectral(m, alpha, t);
  // physical route: I(t) = int (G conv G)(z) gamma(z) dz with gamma sampled
  // in physical space; the transform is used only as fast convolution
  KernelField k = evaluate_kernel(g, alpha, t);
  SpectralField f = forward_transform(k.field);
  SpectralField prod(g);
  for (std::size_t i = 0; i < g.size(); ++i) prod.coeffs[i] = f.coeffs[i] * f.coeffs[i];
  RealField conv = inverse_transform(prod, 1e-6);
  std::vector<double> gam = grid_physical_covariance(m, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += conv[i] * gam[i];
  res.physical = acc * g.cell_volume();
  return res;
}

double correlation_time_kernel(const CovarianceModel& m, double alpha, double t) {
  // alpha < 2 kernels have polynomial tails, so the physical route needs a
  // much wider torus than the kernel width to capture the gamma-weighted mass
  double width = std::pow(t, 1.0 / alpha);
  double spread = alpha < 2.0 ? 40.0 : 8.0;
  GridSpec g = m.dim == 1 ? GridSpec(1, std::max(8.0, spread * width), 32768)
                          : GridSpec(2, std::max(6.0, 0.5 * spread * width), 2048);
  TimeKernelResult r = time_kernel_routes(m, alpha, t, g);
  double rel = std::fabs(r.physical - r.spectral) / std::fabs(r.spectral);
  if (rel > 5e-3) {
    std::ostringstream os;
    os << "time kernel: physical (" << r.physical << ") and spectral (" << r.spectral
       << ") routes disagree by " << rel * 100.0 << "% (> 0.5%)";
    throw std::runtime_error(os.str());
  }
  return r.spectral;
}

RealField sample_noise_increment(const GridSpec& g, const CovarianceModel& m, double dt,
                                 const CounterRng& stream) {
  if (dt <= 0.0) throw std::invalid_argument("noise increment: dt must be positive");
  RealField out(g);
  int N = g.points_per_axis;

  if (m.variant == NoiseVariant::WhiteNoise) {
    // per-cell draws keyed by the signed physical cell index, so grids of
    // equal spacing share the variates on their common cells
    double sd = std::sqrt(dt) / std::pow(g.dx(), g.dim / 2.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::int64_t m0 = static_cast<std::int64_t>(i) - N / 2;
      out[i] = sd * stream.normal(CounterRng::zigzag(m0));
    }
    return out;
  }

  // the spectral density depends only on (model, grid); memoize it so the
  // per-step sampler does not redo the mode sweep (and the Riesz cell
  // averages) millions of times per ensemble
  static std::mutex cache_mutex;
  static std::map<std::string, std::shared_ptr<const std::vector<double>>> cache;
  std::shared_ptr<const std::vector<double>> dens_ptr;
  {
    std::ostringstream key;
    key << m.label() << '|' << m.beta << '|' << m.density_scale;
    for (const auto& p : m.mu) key << '|' << p.weight << ',' << p.x0 << ',' << p.x1;
    key << '#' << g.dim << ',' << g.half_length << ',' << g.points_per_axis;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key.str());
    if (it == cache.end()) {
      it = cache.emplace(key.str(),
                         std::make_shared<const std::vector<double>>(
                             grid_spectral_density(m, g)))
               .first;
    }
    dens_ptr = it->second;
  }
  const std::vector<double>& dens = *dens_ptr;
  std::vector<cplx> what(g.size());
  double vol = std::pow(2.0 * g.half_length, g.dim);
  auto conj_slot = [&](std::size_t i) -> std::size_t {
    if (g.dim == 1) return (N - i) % N;
    std::size_t a = i / N, b = i % N;
    return ((N - a) % N) * N + (N - b) % N;
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t j = conj_slot(i);
    if (i > j) continue;  // filled when its partner was visited
    double sd_i = std::sqrt(dt * dens[i] * vol);
    if (i == j) {
      what[i] = sd_i * stream.normal(i);  // self-paired mode is real
    } else {
      double a, b;
      stream.normal_pair(i, a, b);  // keyed by the smaller slot of the pair
      cplx z(a / std::sqrt(2.0), b / std::sqrt(2.0));
      what[i] = sd_i * z;
      what[j] = std::conj(what[i]);
    }
  }
  std::vector<cplx> phys = inverse_transform_complex(g, what);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = phys[i].real();
  return out;
}

bool verify_dalang(const CovarianceModel& m, double alpha, std::string* diagnostic) {
  auto fail = [&](const std::string& why) {
    if (diagnostic) *diagnostic = why;
    return false;
  };
  switch (m.variant) {
    case NoiseVariant::WhiteNoise:
      if (alpha <= 1.0) return fail("white noise needs alpha > 1 for the spectral integral");
      return true;
    case NoiseVariant::RieszKernel:
      if (m.beta >= alpha)
        return fail("riesz regime needs beta < alpha for the high-frequency tail");
      return true;
    case NoiseVariant::IntegrableDensity: {
      // numeric tail test: the dyadic segments of the integrand must decay
      auto seg = [&](double a, double b) {
        return integrate_adaptive(
            [&](double r) {
              double ring = m.dim == 1 ? 1.0 : r;
              return ring * angular_density(m, r) / (1.0 + 2.0 * std::pow(r, alpha));
            },
            a, b, 1e-10);
      };
      double s1 = seg(256.0, 512.0), s2 = seg(512.0, 1024.0);
      if (s2 > 0.75 * s1 && s2 > 1e-12)
        return fail("spectral tail of the covariance density does not decay summably");
      return true;
    }
  }
  return fail("unknown covariance variant");
}

}  // namespace sfh

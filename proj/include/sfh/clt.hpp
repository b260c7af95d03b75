#pragma once

#include <cstdint>
#include <vector>

#include "sfh/constants.hpp"
#include "sfh/solver.hpp"
#include "sfh/stats.hpp"

namespace sfh {

// Volume fraction of each grid cell inside the centered ball of radius R
// (d=2 boundary cells resolved by 32x32 supersampling).
std::vector<double> ball_weights(const GridSpec& g, double R);

// int_{B_R} (u - 1) dx with partial-cell boundary weights.
double spatial_average(const RealField& u, double R);

// One simulation ensemble reduced to the per-replica scalars every
// experiment consumes: ball averages at each (R, snapshot time) plus the
// spatial moments needed for the limiting constants.
struct CltEnsemble {
  std::vector<double> R_list;
  std::vector<double> times;
  int replicas = 0;
  double beta = 0.0;
  int dim = 1;
  // G[r][ti][rep] = spatial average at radius R_list[r], time times[ti]
  std::vector<std::vector<std::vector<double>>> G;
  // spatial mean of sigma(u) and sigma(u)^2, indexed [ti][rep]
  std::vector<std::vector<double>> mean_sigma;
  std::vector<std::vector<double>> mean_sigma_sq;
};

CltEnsemble run_clt_ensemble(const SolverConfig& cfg, const std::vector<double>& R_list,
                             int n_workers);

struct VarianceScaling {
  std::vector<VarianceEstimate> var;  // per R
  SlopeFit fit;                       // log Var vs log R
};
VarianceScaling variance_scaling(const CltEnsemble& e, double t, std::uint64_t seed);

struct CovLimitRow {
  double R = 0.0;
  double scaled_cov = 0.0;  // R^{beta-2d} Cov(G_R(t), G_R(r))
  double std_error = 0.0;
};
struct CovLimitResult {
  std::vector<CovLimitRow> rows;
  double target = 0.0;  // k_beta int_0^{t^r} [mass theta^2 or nu^2] ds
};
CovLimitResult limiting_covariance(const CltEnsemble& e, const CovarianceModel& m,
                                   const SigmaSpec& sig, double t, double r);

struct DistanceRow {
  double R = 0.0;
  DistanceEstimate ks;
  TvEstimate tv;
};
struct DistanceExperiment {
  std::vector<DistanceRow> rows;
  SlopeFit ks_fit;  // log KS vs log R
  SlopeFit tv_fit;  // log corrected TV vs log R
  bool ks_decreasing = false;  // strictly decreasing up to CI overlap
  bool tv_decreasing = false;
};
DistanceExperiment gaussian_distance(const CltEnsemble& e, double t, std::uint64_t seed);

struct FcltResult {
  std::vector<double> times;
  std::vector<std::vector<double>> empirical;  // cov of R^{beta/2-d} G_R(t_i)
  std::vector<std::vector<double>> target;     // int_0^{t_i ^ t_j} rho^2 ds
  std::vector<std::vector<double>> std_error;
  double max_rel_gap = 0.0;  // over entries whose gap exceeds 3 s.e.
  double mardia_p = 0.0;
};
FcltResult fclt_covariance(const CltEnsemble& e, const CovarianceModel& m,
                           const SigmaSpec& sig, double R);

// Deterministic additive-noise (sigma = const) oracle:
// Cov(G_R(t), G_R(r)) = (2pi)^{-d} int |phihat_R|^2 ghat_gamma
//                       e^{-|t-r| a} (1 - e^{-2 (t^r) a}) / (2a) dxi,
// a = |xi|^alpha, |phihat_R(xi)|^2 = (2 pi R)^d |xi|^{-d} J_{d/2}(R|xi|)^2.
double additive_ball_covariance(const CovarianceModel& m, double alpha, double R,
                                double t, double r, double sigma1);

// Exact-second-moment bound driving the path-continuity criterion:
// K_R(t,s) = (2pi)^{-d} int |phihat_R|^2 ghat_gamma [ I1 + I2 ] dxi with
// I1 = (1-e^{-(t-s)a})^2 (1-e^{-2sa})/(2a), I2 = (1-e^{-2(t-s)a})/(2a).
double tightness_bound(const CovarianceModel& m, double alpha, double R, double t,
                       double s);

struct TightnessRow {
  double R = 0.0, t = 0.0, s = 0.0;
  double value = 0.0;  // K_R(t,s)
  double ratio = 0.0;  // K_R / (R^{2d-beta} (t-s))
};
std::vector<TightnessRow> tightness_table(const CovarianceModel& m, double alpha,
                                          const std::vector<double>& R_list,
                                          const std::vector<std::pair<double, double>>& ts);

}  // namespace sfh

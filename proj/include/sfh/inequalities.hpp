#pragma once

#include <string>
#include <vector>

#include "sfh/covariance.hpp"
#include "sfh/grid.hpp"
#include "sfh/solver.hpp"

namespace sfh {

// Existential inequalities are operationalized as: a finite witness constant
// (max LHS/RHS over a pre-registered battery) that moves by less than 2x
// under grid/step refinement.
struct InequalityReport {
  std::string id;
  std::vector<double> ratios;   // battery LHS/RHS values (coarse run)
  double witness = 0.0;         // max ratio, coarse
  double refined_witness = 0.0; // max ratio, refined
  bool pass = false;
};

// int f (g conv gamma) <= C ||f||_{2q} ||g||_{2q} over a 20-pair battery of
// nonnegative test fields (gaussians, indicators, kernel powers).
InequalityReport check_convolution_inequality(const CovarianceModel& m, double alpha,
                                              double two_q, const GridSpec& g);

// int G_alpha(t, x-y)|y|^{-beta} dy <= C |x|^{-beta}, d = 2, beta < alpha < 2;
// the |y|^{-beta} cusp is integrated by local polar refinement within 4 dx.
InequalityReport check_riesz_smoothing(double alpha, double beta,
                                       const std::vector<double>& t_list,
                                       const std::vector<double>& x_list,
                                       const GridSpec& g);

struct GronwallReport {
  std::vector<double> t_grid;
  int iterations_used = 0;
  bool converged = false;        // sup increment < 1e-6 of scale
  bool monotone = false;         // g_{n+1} >= g_n pointwise
  bool series_summable = false;  // Gamma-coefficient ratios -> 0 by j = 30
  double series_witness = 0.0;   // C in g_n^2 <= C sum_j c_j t^{j(1-k)-k} G^{1/q}
  double final_witness = 0.0;    // c in g <= c t^{-k/2} G^{1/(2q)}
  double refined_series_witness = 0.0;
  double refined_final_witness = 0.0;
  bool pass = false;
};

// g_0 = G, g_{n+1}^2 = G^2 + int_0^t intint G G g_n g_n gamma, with the
// double spatial integral evaluated spectrally; checks the induction bound
// and the converged-iterate bound.
GronwallReport gronwall_iteration(const CovarianceModel& m, double alpha, double two_q,
                                  int n_max, const GridSpec& g, double T, int nt);

// ||D_{r,z} u(t,x)||_2 <= c (t-r)^{-kappa/2} G^{1/(2q)}(t-r, x-z) over a
// (t, x) battery; refinement halves dt on the SAME noise path (substep
// coupling). z sits at the origin node.
InequalityReport check_malliavin_bound(const SolverConfig& cfg, double r_time,
                                       double two_q, int replicas, int n_workers);

}  // namespace sfh

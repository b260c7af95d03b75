#include "sfh/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sfh/clt.hpp"
#include "sfh/constants.hpp"
#include "sfh/green.hpp"
#include "sfh/inequalities.hpp"
#include "sfh/sha256.hpp"
#include "sfh/stats.hpp"

namespace sfh {

using nlohmann::json;

namespace {

const char* kToolVersion = "sfh 1.0.0";

const std::vector<std::string> kKinds = {"kernel",     "noise-validate", "simulate",
                                         "constants",  "clt",            "fclt",
                                         "tightness",  "inequalities",   "all"};

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

}  // namespace

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    out += ch;
    if (ch == '"') out += '"';
  }
  out += '"';
  return out;
}

double ExperimentConfig::tol(const std::string& name, double fallback) const {
  auto it = tolerance_overrides.find(name);
  return it == tolerance_overrides.end() ? fallback : it->second;
}

namespace {

// Build the normalized (defaults filled) config document; its sorted-key dump
// is the canonical form that gets hashed.
json normalize(const json& in, std::vector<std::string>& violations) {
  json out;
  auto get = [&](const char* key, json dflt) -> json {
    return in.contains(key) ? in.at(key) : dflt;
  };
  out["schema_version"] = get("schema_version", 1);
  out["kind"] = get("kind", "");
  json grid = get("grid", json::object());
  out["grid"]["dim"] = grid.value("dim", 1);
  out["grid"]["half_length"] = grid.value("half_length", 8.0);
  out["grid"]["points_per_axis"] = grid.value("points_per_axis", 512);
  json model = get("model", json::object());
  out["model"]["variant"] = model.value("variant", "white_noise");
  out["model"]["beta"] = model.value("beta", 0.5);
  out["model"]["mu"] = model.value("mu", json::array({{{"w", 1.0}, {"x", {0.0}}}}));
  out["model"]["density"] = {{"name", model.contains("density")
                                          ? model["density"].value("name", "gaussian")
                                          : "gaussian"},
                             {"scale", model.contains("density")
                                           ? model["density"].value("scale", 1.0)
                                           : 1.0}};
  json sigma = get("sigma", json::object());
  out["sigma"]["kind"] = sigma.value("kind", "constant");
  out["sigma"]["a"] = sigma.value("a", 1.0);
  out["sigma"]["b"] = sigma.value("b", 0.0);
  json solver = get("solver", json::object());
  out["solver"]["alpha"] = solver.value("alpha", 1.5);
  out["solver"]["dt"] = solver.value("dt", 1e-3);
  out["solver"]["T"] = solver.value("T", 0.5);
  out["solver"]["snapshot_times"] =
      solver.value("snapshot_times", json::array({solver.value("T", 0.5)}));
  out["solver"]["noise_substeps"] = solver.value("noise_substeps", 1);
  out["replicas"] = get("replicas", 100);
  out["master_seed"] = get("master_seed", 1);
  out["R_list"] = get("R_list", json::array({1.0, 2.0, 4.0}));
  out["output_root"] = get("output_root", "");
  out["workers"] = get("workers", 0);
  out["tolerance_overrides"] = get("tolerance_overrides", json::object());
  for (auto& [key, val] : in.items()) {
    if (!out.contains(key)) violations.push_back("unknown config key: " + key);
    (void)val;
  }
  return out;
}

CovarianceModel build_model(const json& n, int dim, double alpha,
                            std::vector<std::string>& violations) {
  const json& jm = n.at("model");
  std::string variant = jm.at("variant");
  CovarianceModel m;
  if (variant == "white_noise") {
    m = white_noise();
    m.dim = dim;
    m.beta = dim;
    if (dim != 1) violations.push_back("white_noise: case (ii) requires d = 1");
    if (!(alpha > 1.0))
      violations.push_back("white_noise: case (ii) requires alpha > 1");
  } else if (variant == "riesz") {
    double beta = jm.at("beta");
    std::vector<PointMass> mu;
    for (const auto& pm : jm.at("mu")) {
      PointMass p;
      p.weight = pm.value("w", 1.0);
      auto x = pm.value("x", std::vector<double>{0.0});
      p.x0 = x.empty() ? 0.0 : x[0];
      p.x1 = x.size() > 1 ? x[1] : 0.0;
      mu.push_back(p);
    }
    m.variant = NoiseVariant::RieszKernel;
    m.dim = dim;
    m.beta = beta;
    m.mu = mu;
    if (!(beta > 0.0))
      violations.push_back("riesz: case (i) requires beta > 0");
    if (!(beta < std::min(alpha, double(dim))))
      violations.push_back("riesz: case (i) requires beta < alpha AND beta < d");
  } else if (variant == "density") {
    try {
      m = integrable_density(dim, jm.at("density").at("name"),
                             jm.at("density").at("scale"));
    } catch (const std::exception& e) {
      violations.push_back(std::string("density: ") + e.what());
      return m;
    }
    if (!(m.r_exponent > dim / alpha))
      violations.push_back("density: case (iii) requires gamma in L^r with r > d/alpha");
  } else {
    violations.push_back("model.variant must be white_noise | riesz | density");
    return m;
  }
  try {
    validate_model(m, alpha);
  } catch (const std::exception& e) {
    violations.push_back(e.what());
  }
  return m;
}

SigmaSpec build_sigma(const json& n, std::vector<std::string>& violations) {
  const json& js = n.at("sigma");
  std::string kind = js.at("kind");
  double a = js.at("a"), b = js.at("b");
  try {
    if (kind == "constant") return sigma_constant(a);
    if (kind == "linear") return sigma_linear(a, b);
    return sigma_registry(kind, a, b);
  } catch (const std::exception& e) {
    violations.push_back(std::string("sigma: ") + e.what());
  }
  return SigmaSpec{};
}

}  // namespace

ExperimentConfig parse_and_validate(const std::string& json_text) {
  json in;
  try {
    in = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> v;
  json n = normalize(in, v);

  ExperimentConfig cfg;
  cfg.schema_version = n.at("schema_version");
  if (cfg.schema_version != 1) v.push_back("schema_version must be 1");
  cfg.kind = n.at("kind");
  if (std::find(kKinds.begin(), kKinds.end(), cfg.kind) == kKinds.end())
    v.push_back("kind must be one of kernel | noise-validate | simulate | constants | "
                "clt | fclt | tightness | inequalities | all");

  int dim = n["grid"]["dim"];
  double L = n["grid"]["half_length"];
  int N = n["grid"]["points_per_axis"];
  if (dim != 1 && dim != 2) v.push_back("grid.dim must be 1 or 2");
  if (!(L > 0.0)) v.push_back("grid.half_length must be positive");
  if (N <= 0 || (N & (N - 1)) != 0) v.push_back("grid.points_per_axis must be a power of two");

  SolverConfig& s = cfg.solver;
  s.alpha = n["solver"]["alpha"];
  s.dt = n["solver"]["dt"];
  s.T = n["solver"]["T"];
  s.snapshot_times = n["solver"]["snapshot_times"].get<std::vector<double>>();
  s.noise_substeps = n["solver"]["noise_substeps"];
  s.replicas = n["replicas"];
  s.master_seed = n["master_seed"];
  if (!(s.alpha > 0.0 && s.alpha <= 2.0)) v.push_back("solver.alpha must lie in (0, 2]");
  if (s.replicas < 1) v.push_back("replicas must be >= 1");

  bool grid_ok = (dim == 1 || dim == 2) && L > 0.0 && N > 0 && (N & (N - 1)) == 0;
  if (grid_ok) {
    s.grid = GridSpec(dim, L, N);
    std::size_t before = v.size();
    s.model = build_model(n, dim, s.alpha, v);
    s.sigma = build_sigma(n, v);
    if (v.size() == before) {  // model structurally sound: deeper physics checks
      std::string diag;
      if (!verify_dalang(s.model, s.alpha, &diag))
        v.push_back("Dalang condition fails: " + diag);
      try {
        validate_solver_config(s);
      } catch (const std::exception& e) {
        v.push_back(e.what());
      }
    }
  }

  cfg.R_list = n["R_list"].get<std::vector<double>>();
  for (double R : cfg.R_list)
    if (!(R > 0.0 && R < L)) v.push_back("R_list entries must lie in (0, half_length)");
  cfg.output_root = n["output_root"];
  cfg.workers = n["workers"];
  if (cfg.workers < 0) v.push_back("workers must be >= 0");
  for (auto& [key, val] : n["tolerance_overrides"].items())
    cfg.tolerance_overrides[key] = val.get<double>();

  if (!v.empty()) {
    std::string msg = "config rejected with " + std::to_string(v.size()) + " violation(s):";
    for (const std::string& one : v) msg += "\n  - " + one;
    throw std::runtime_error(msg);
  }
  cfg.canonical = n.dump(2);
  cfg.config_hash = Sha256::of(cfg.canonical);
  return cfg;
}

ExperimentConfig load_and_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_and_validate(buf.str());
}

namespace {

std::string time_stamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::gmtime(&t));
  return buf;
}

int resolved_workers(const ExperimentConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 4 : static_cast<int>(hc);
}

struct ArtifactSink {
  std::filesystem::path dir;
  json manifest_files = json::array();

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    manifest_files.push_back({{"name", name},
                              {"bytes", content.size()},
                              {"sha256", Sha256::of(content)}});
  }
};

struct Contract {
  std::string name;
  bool pass = false;
  std::string detail;
};

void append(std::vector<Contract>& cs, const CriterionResult& r) {
  cs.push_back({r.name, r.pass, r.detail});
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += csv_quote(cells[i]);
  }
  row += "\r\n";
  return row;
}

// midpoint-of-horizon snapshot used as the reference time for CLT statistics
double reference_time(const SolverConfig& s) {
  double best = s.snapshot_times.front();
  for (double t : s.snapshot_times)
    if (std::fabs(t - s.T / 2) < std::fabs(best - s.T / 2)) best = t;
  return best;
}

void run_kernel_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                     std::vector<Contract>& cs) {
  const GridSpec& g = cfg.solver.grid;
  std::string csv = csv_row({"t", "mass", "semigroup_err", "scaling_err", "well_resolved"});
  bool ok = true;
  std::ostringstream detail;
  for (double t : cfg.solver.snapshot_times) {
    KernelField k = evaluate_kernel(g, cfg.solver.alpha, t);
    double peak = *std::max_element(k.field.values.begin(), k.field.values.end());
    double sg = check_semigroup(g, cfg.solver.alpha, t / 2, t / 2);
    double sc = check_scaling(g, cfg.solver.alpha, t);
    bool row_ok = std::fabs(k.mass - 1.0) < cfg.tol("kernel.mass", 1e-4) &&
                  sg < cfg.tol("kernel.semigroup", 1e-6) * peak &&
                  sc < cfg.tol("kernel.scaling", 1e-4);
    ok = ok && row_ok;
    detail << "t=" << t << " mass=" << k.mass << " semigroup=" << sg << " scaling=" << sc
           << (row_ok ? " ok" : " FAIL") << '\n';
    csv += csv_row({fmt(t), fmt(k.mass), fmt(sg), fmt(sc),
                    k.well_resolved ? "true" : "false"});
  }
  sink.write("kernel.csv", csv);
  cs.push_back({"kernel-properties", ok, detail.str()});
}

void run_noise_validate_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                             std::vector<Contract>& cs) {
  const SolverConfig& s = cfg.solver;
  bool pd_ok = true;
  std::string pd_detail = "spectral clip within 1e-6";
  try {
    check_grid_density(s.model, s.grid);
  } catch (const std::exception& e) {
    pd_ok = false;
    pd_detail = e.what();
  }
  cs.push_back({"positive-definite", pd_ok, pd_detail});
  std::string diag;
  bool dal = verify_dalang(s.model, s.alpha, &diag);
  cs.push_back({"dalang-condition", dal, diag});
  if (s.grid.dim != 1 || !pd_ok) return;

  const GridSpec& g = s.grid;
  int N = g.points_per_axis;
  double dt = 0.01;
  auto test_fn = [](int j, double x) {
    switch (j) {
      case 0: return std::exp(-x * x);
      case 1: return std::exp(-0.5 * (x - 1.0) * (x - 1.0));
      case 2: return std::fabs(x) <= 1.0 ? 1.0 : 0.0;
      default: return std::cos(x) * std::exp(-x * x / 4.0);
    }
  };
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 3}};
  std::vector<std::vector<double>> f(4, std::vector<double>(N));
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < N; ++i) f[j][i] = test_fn(j, g.node(i));
  std::vector<double> gv = grid_physical_covariance(s.model, g);
  std::string csv = csv_row({"pair", "empirical", "target", "std_error", "pass"});
  bool ok = true;
  std::ostringstream detail;
  int draws = s.replicas;
  std::vector<std::vector<double>> prod(6, std::vector<double>(draws));
  for (int n = 0; n < draws; ++n) {
    RealField dW =
        sample_noise_increment(g, s.model, dt, CounterRng::derive(s.master_seed, 7, n + 1));
    double S[4];
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int i = 0; i < N; ++i) acc += f[j][i] * dW[i];
      S[j] = acc * g.dx();
    }
    for (int p = 0; p < 6; ++p) prod[p][n] = S[pairs[p][0]] * S[pairs[p][1]];
  }
  for (int p = 0; p < 6; ++p) {
    double target = 0.0;
    for (int i = 0; i < N; ++i) {
      double row = 0.0;
      for (int j = 0; j < N; ++j)
        row += gv[((i - j + N / 2) % N + N) % N] * f[pairs[p][1]][j];
      target += f[pairs[p][0]][i] * row;
    }
    target *= dt * g.dx() * g.dx();
    double emp = mean(prod[p]);
    double se = std::sqrt(sample_variance(prod[p]) / draws);
    bool row_ok = std::fabs(emp - target) <= 3.0 * se;
    ok = ok && row_ok;
    std::string tag = std::to_string(pairs[p][0]) + "-" + std::to_string(pairs[p][1]);
    detail << "pair " << tag << " emp=" << emp << " target=" << target << " se=" << se
           << (row_ok ? " ok" : " FAIL") << '\n';
    csv += csv_row({tag, fmt(emp), fmt(target), fmt(se), row_ok ? "true" : "false"});
  }
  sink.write("sampler_covariance.csv", csv);
  cs.push_back({"sampler-covariance", ok, detail.str()});
}

void run_simulate_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                       std::vector<Contract>& cs) {
  const SolverConfig& s = cfg.solver;
  std::size_t nt = s.snapshot_times.size();
  std::vector<std::vector<double>> spatial_mean(nt, std::vector<double>(s.replicas));
  std::vector<std::vector<double>> origin(nt, std::vector<double>(s.replicas));
  std::size_t origin_slot = s.grid.size() / 2 + (s.grid.dim == 2 ? s.grid.points_per_axis / 2 : 0);
  Trajectory first;
  std::mutex first_mx;
  run_ensemble(s, resolved_workers(cfg), [&](const Trajectory& tr) {
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      double acc = 0.0;
      for (double v : tr.fields[k].values) acc += v;
      spatial_mean[k][tr.replica] = acc / double(tr.fields[k].values.size());
      origin[k][tr.replica] = tr.fields[k][origin_slot];
    }
    if (tr.replica == 0) {
      std::lock_guard<std::mutex> lk(first_mx);
      first = tr;
    }
  });
  // replica-0 snapshots as raw little-endian doubles with JSON sidecars
  for (std::size_t k = 0; k < first.times.size(); ++k) {
    const auto& vals = first.fields[k].values;
    std::string raw(reinterpret_cast<const char*>(vals.data()),
                    vals.size() * sizeof(double));
    std::string base = "snapshot_" + std::to_string(k);
    sink.write(base + ".bin", raw);
    json side = {{"time", first.times[k]},
                 {"dim", s.grid.dim},
                 {"half_length", s.grid.half_length},
                 {"points_per_axis", s.grid.points_per_axis},
                 {"dtype", "float64"},
                 {"byte_order", "little"},
                 {"count", vals.size()}};
    sink.write(base + ".json", side.dump(2) + "\n");
  }
  std::string csv =
      csv_row({"time", "mean_of_spatial_mean", "se", "var_at_origin", "var_se"});
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t k = 0; k < nt; ++k) {
    double mm = mean(spatial_mean[k]);
    double se = std::sqrt(sample_variance(spatial_mean[k]) / s.replicas);
    VarianceEstimate v = variance_with_ci(origin[k], s.master_seed + 5 + k);
    bool row_ok = std::fabs(mm - 1.0) <= std::max(5.0 * se, 1e-12);
    ok = ok && row_ok;
    detail << "t=" << first.times[k] << " mean=" << mm << " se=" << se
           << (row_ok ? " ok" : " FAIL") << '\n';
    csv += csv_row({fmt(first.times[k]), fmt(mm), fmt(se), fmt(v.value), fmt(v.std_error)});
  }
  sink.write("summary.csv", csv);
  cs.push_back({"mean-preservation", ok, detail.str()});
}

void run_constants_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                        std::vector<Contract>& cs) {
  std::string csv = csv_row({"d", "beta", "quadrature", "bessel", "rel_gap"});
  const int ds[] = {1, 1, 2, 2};
  const double betas[] = {0.5, 1.0, 1.0, 2.0};
  bool ok = true;
  std::ostringstream detail;
  for (int i = 0; i < 4; ++i) {
    KBetaResult k = k_beta_routes(ds[i], betas[i]);
    ok = ok && k.rel_gap < 0.005;
    detail << "k_beta(" << ds[i] << "," << betas[i] << ") = " << k.value
           << " gap=" << k.rel_gap << '\n';
    csv += csv_row({fmt(ds[i]), fmt(betas[i]), fmt(k.quadrature), fmt(k.bessel),
                    fmt(k.rel_gap)});
  }
  sink.write("k_beta.csv", csv);
  cs.push_back({"k-beta-routes", ok, detail.str()});

  const SolverConfig& s = cfg.solver;
  std::string csv2 = csv_row({"t", "I_spectral"});
  bool routes_ok = true;
  std::ostringstream d2;
  d2 << "Upsilon(1) = " << dalang_upsilon(s.model, s.alpha, 1.0) << '\n';
  for (double t : s.snapshot_times) {
    try {
      double I = correlation_time_kernel(s.model, s.alpha, t);
      csv2 += csv_row({fmt(t), fmt(I)});
      d2 << "I(" << t << ") = " << I << " (routes agree to 0.5%)\n";
    } catch (const std::exception& e) {
      routes_ok = false;
      d2 << "I(" << t << ") FAIL: " << e.what() << '\n';
    }
  }
  sink.write("time_kernel.csv", csv2);
  cs.push_back({"time-kernel-routes", routes_ok, d2.str()});
}

void run_clt_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                  std::vector<Contract>& cs) {
  const SolverConfig& s = cfg.solver;
  CltEnsemble e = run_clt_ensemble(s, cfg.R_list, resolved_workers(cfg));
  double t_star = reference_time(s);

  VarianceScaling vs = variance_scaling(e, t_star, s.master_seed + 21);
  std::string csv = csv_row({"R", "variance", "std_error", "ci_lo", "ci_hi"});
  for (std::size_t i = 0; i < cfg.R_list.size(); ++i)
    csv += csv_row({fmt(cfg.R_list[i]), fmt(vs.var[i].value), fmt(vs.var[i].std_error),
                    fmt(vs.var[i].ci_lo), fmt(vs.var[i].ci_hi)});
  sink.write("variance_scaling.csv", csv);
  double target_slope = 2.0 * s.grid.dim - s.model.beta;
  std::ostringstream d1;
  d1 << "slope=" << vs.fit.slope << " +- " << vs.fit.slope_se << " target=" << target_slope;
  cs.push_back({"variance-scaling-slope",
                std::fabs(vs.fit.slope - target_slope) <= cfg.tol("clt.slope", 0.15),
                d1.str()});

  CovLimitResult lim = limiting_covariance(e, s.model, s.sigma, t_star, t_star);
  const CovLimitRow& row = lim.rows.back();
  std::ostringstream d2;
  d2 << "scaled var at R=" << row.R << ": " << row.scaled_cov << " target " << lim.target;
  cs.push_back({"limiting-covariance",
                std::fabs(row.scaled_cov - lim.target) <
                    std::max(cfg.tol("clt.limit", 0.10) * std::fabs(lim.target),
                             3.0 * row.std_error),
                d2.str()});

  DistanceExperiment de = gaussian_distance(e, t_star, s.master_seed + 22);
  std::string csv3 = csv_row({"R", "ks", "ks_lo", "ks_hi", "tv_raw", "tv_floor",
                              "tv_corrected", "tv_lo", "tv_hi"});
  for (const DistanceRow& r : de.rows)
    csv3 += csv_row({fmt(r.R), fmt(r.ks.value), fmt(r.ks.ci_lo), fmt(r.ks.ci_hi),
                     fmt(r.tv.raw), fmt(r.tv.floor), fmt(r.tv.corrected), fmt(r.tv.ci_lo),
                     fmt(r.tv.ci_hi)});
  sink.write("gaussian_distance.csv", csv3);
  std::ostringstream d3;
  d3 << "ks slope=" << de.ks_fit.slope << " tv slope=" << de.tv_fit.slope
     << " decreasing ks=" << de.ks_decreasing << " tv=" << de.tv_decreasing;
  cs.push_back({"distance-decay", de.ks_decreasing && de.tv_decreasing, d3.str()});
}

void run_fclt_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                   std::vector<Contract>& cs) {
  const SolverConfig& s = cfg.solver;
  CltEnsemble e = run_clt_ensemble(s, cfg.R_list, resolved_workers(cfg));
  FcltResult f = fclt_covariance(e, s.model, s.sigma, cfg.R_list.back());
  std::string csv = csv_row({"ti", "tj", "empirical", "target", "std_error"});
  for (std::size_t i = 0; i < f.times.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      csv += csv_row({fmt(f.times[i]), fmt(f.times[j]), fmt(f.empirical[i][j]),
                      fmt(f.target[i][j]), fmt(f.std_error[i][j])});
  sink.write("fclt_covariance.csv", csv);
  std::ostringstream d;
  d << "max relative gap=" << f.max_rel_gap << " mardia p=" << f.mardia_p;
  cs.push_back({"fclt-covariance", f.max_rel_gap < cfg.tol("fclt.gap", 0.15), d.str()});
  cs.push_back({"fclt-mardia", f.mardia_p > cfg.tol("fclt.mardia", 0.01),
                "p=" + fmt(f.mardia_p)});
}

void run_tightness_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                        std::vector<Contract>& cs) {
  const SolverConfig& s = cfg.solver;
  std::vector<std::pair<double, double>> ts;
  const auto& times = s.snapshot_times;
  for (std::size_t i = 0; i < times.size() && ts.size() < 8; ++i)
    for (std::size_t j = i + 1; j < times.size() && ts.size() < 8; ++j)
      ts.push_back({times[j], times[i]});
  if (ts.empty()) ts = {{times.front(), times.front() / 2}};
  auto rows = tightness_table(s.model, s.alpha, cfg.R_list, ts);
  std::string csv = csv_row({"R", "t", "s", "K", "ratio"});
  double lo = 1e300, hi = 0.0;
  for (const TightnessRow& r : rows) {
    csv += csv_row({fmt(r.R), fmt(r.t), fmt(r.s), fmt(r.value), fmt(r.ratio)});
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  sink.write("tightness.csv", csv);
  std::ostringstream d;
  d << "ratio spread " << hi / std::max(lo, 1e-300) << " over " << rows.size() << " rows";
  cs.push_back({"tightness-ratio", lo > 0.0 && hi / lo < cfg.tol("tightness.spread", 10.0),
                d.str()});
}

void run_inequalities_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                           std::vector<Contract>& cs) {
  const SolverConfig& s = cfg.solver;
  std::string csv = csv_row({"id", "witness", "refined_witness", "pass"});
  double window =
      std::min(2.0 * s.grid.dim / (2.0 * s.grid.dim - s.alpha),
               (s.grid.dim + s.alpha) / s.grid.dim);
  double two_q = 0.5 * (1.0 + window);
  {
    InequalityReport r = check_convolution_inequality(
        s.model, s.alpha, two_q, GridSpec(s.grid.dim, 8.0, s.grid.dim == 1 ? 512 : 128));
    csv += csv_row({r.id, fmt(r.witness), fmt(r.refined_witness), r.pass ? "true" : "false"});
    cs.push_back({"convolution-inequality", r.pass,
                  "witness " + fmt(r.witness) + " refined " + fmt(r.refined_witness)});
  }
  {
    InequalityReport r =
        check_riesz_smoothing(1.5, 1.0, {0.5, 1.0}, {1.0, 2.0}, GridSpec(2, 12.0, 256));
    csv += csv_row({r.id, fmt(r.witness), fmt(r.refined_witness), r.pass ? "true" : "false"});
    cs.push_back({"riesz-smoothing", r.pass,
                  "witness " + fmt(r.witness) + " refined " + fmt(r.refined_witness)});
  }
  {
    CovarianceModel gm = s.grid.dim == 1 ? s.model : riesz_kernel(1, 0.5);
    GronwallReport r = gronwall_iteration(gm, 1.5, 1.2, 25, GridSpec(1, 6.0, 256), 0.5, 12);
    csv += csv_row({"gronwall-series", fmt(r.series_witness), fmt(r.refined_series_witness),
                    r.pass ? "true" : "false"});
    csv += csv_row({"gronwall-final", fmt(r.final_witness), fmt(r.refined_final_witness),
                    r.pass ? "true" : "false"});
    std::ostringstream d;
    d << "iters=" << r.iterations_used << " converged=" << r.converged
      << " monotone=" << r.monotone << " series witness " << r.series_witness << " / "
      << r.refined_series_witness;
    cs.push_back({"gronwall-iteration", r.pass, d.str()});
  }
  {
    SolverConfig mc;
    mc.alpha = 1.5;
    mc.dt = 2.5e-3;
    mc.T = 0.5;
    mc.grid = GridSpec(1, 8.0, 256);
    mc.model = riesz_kernel(1, 0.5);
    mc.sigma = sigma_linear(0.5);
    mc.replicas = std::min(s.replicas, 2000);
    mc.master_seed = s.master_seed + 404;
    mc.snapshot_times = {0.2, 0.3, 0.5};
    mc.noise_substeps = 2;
    InequalityReport r =
        check_malliavin_bound(mc, 0.1, 1.2, mc.replicas, resolved_workers(cfg));
    csv += csv_row({r.id, fmt(r.witness), fmt(r.refined_witness), r.pass ? "true" : "false"});
    cs.push_back({"derivative-field-bound", r.pass,
                  "witness " + fmt(r.witness) + " refined " + fmt(r.refined_witness)});
  }
  sink.write("inequalities.csv", csv);
}

void run_all_kind(const ExperimentConfig& cfg, ArtifactSink& sink,
                  std::vector<Contract>& cs) {
  BatteryConfig b;
  b.workers = resolved_workers(cfg);
  b.seed = cfg.solver.master_seed;
  int n = cfg.solver.replicas;
  b.sampler_draws = n;
  b.oracle_replicas = n;
  b.clt_replicas = n;
  b.subset_replicas = std::min(n, 2000);
  b.malliavin_replicas = std::min(n, 2000);
  std::string csv = csv_row({"criterion", "pass"});
  for (const CriterionResult& r : run_full_battery(b)) {
    append(cs, r);
    csv += csv_row({r.name, r.pass ? "true" : "false"});
  }
  sink.write("battery.csv", csv);
}

}  // namespace

std::string experiment_output_dir(const ExperimentConfig& cfg) {
  std::string root = cfg.output_root;
  if (root.empty()) {
    const char* env = std::getenv("SFH_OUTPUT_ROOT");
    root = env != nullptr ? env : "runs";
  }
  return root + "/" + cfg.config_hash.substr(0, 12) + "-" + time_stamp();
}

int run_experiment(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  ArtifactSink sink;
  sink.dir = experiment_output_dir(cfg);
  std::filesystem::create_directories(sink.dir);
  sink.write("config.json", cfg.canonical + "\n");

  std::vector<Contract> cs;
  bool complete = true;
  std::string error;
  try {
    if (cfg.kind == "kernel") run_kernel_kind(cfg, sink, cs);
    else if (cfg.kind == "noise-validate") run_noise_validate_kind(cfg, sink, cs);
    else if (cfg.kind == "simulate") run_simulate_kind(cfg, sink, cs);
    else if (cfg.kind == "constants") run_constants_kind(cfg, sink, cs);
    else if (cfg.kind == "clt") run_clt_kind(cfg, sink, cs);
    else if (cfg.kind == "fclt") run_fclt_kind(cfg, sink, cs);
    else if (cfg.kind == "tightness") run_tightness_kind(cfg, sink, cs);
    else if (cfg.kind == "inequalities") run_inequalities_kind(cfg, sink, cs);
    else run_all_kind(cfg, sink, cs);
  } catch (const std::exception& e) {
    complete = false;
    error = e.what();
  }

  bool all_pass = complete && !cs.empty();
  json contracts = json::array();
  for (const Contract& c : cs) {
    all_pass = all_pass && c.pass;
    contracts.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  // the verdict is a pure function of config + seed: no wall-clock inside
  json verdict = {{"schema_version", 1},
                  {"tool_version", kToolVersion},
                  {"config_hash", cfg.config_hash},
                  {"kind", cfg.kind},
                  {"complete", complete},
                  {"contracts", contracts},
                  {"all_pass", all_pass}};
  if (!complete) verdict["error"] = error;
  sink.write("verdict.json", verdict.dump(2) + "\n");

  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"config_hash", cfg.config_hash},
                   {"files", sink.manifest_files},
                   {"complete", complete},
                   {"wall_clock_seconds", wall},
                   {"workers", resolved_workers(cfg)},
                   {"tool_version", kToolVersion}};
  std::ofstream mf(sink.dir / "MANIFEST.json", std::ios::binary);
  std::string mtext = manifest.dump(2) + "\n";
  mf.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));

  return all_pass ? 0 : 1;
}

}  // namespace sfh

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sfh/clt.hpp"
#include "sfh/constants.hpp"
#include "sfh/covariance.hpp"
#include "sfh/experiments.hpp"
#include "sfh/green.hpp"
#include "sfh/grid.hpp"
#include "sfh/sigma.hpp"
#include "sfh/solver.hpp"

namespace py = pybind11;
using namespace sfh;

PYBIND11_MODULE(_sfh, m) {
  m.doc() =
      "Spectral solver and verification toolkit for the stochastic fractional "
      "heat equation driven by white-colored noise";

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int, double, int>(), py::arg("dim"), py::arg("half_length"),
           py::arg("points_per_axis"))
      .def_readonly("dim", &GridSpec::dim)
      .def_readonly("half_length", &GridSpec::half_length)
      .def_readonly("points_per_axis", &GridSpec::points_per_axis)
      .def("dx", &GridSpec::dx)
      .def("size", &GridSpec::size);

  py::class_<CovarianceModel>(m, "CovarianceModel")
      .def_readonly("dim", &CovarianceModel::dim)
      .def_readonly("beta", &CovarianceModel::beta)
      .def("label", &CovarianceModel::label);
  m.def("white_noise", &white_noise);
  m.def("riesz_kernel", [](int d, double beta) { return riesz_kernel(d, beta); },
        py::arg("dim"), py::arg("beta"));
  m.def("integrable_density", &integrable_density, py::arg("dim"), py::arg("name"),
        py::arg("scale"));
  m.def("verify_dalang", [](const CovarianceModel& mo, double alpha) {
    std::string diag;
    bool ok = verify_dalang(mo, alpha, &diag);
    return py::make_tuple(ok, diag);
  });
  m.def("dalang_upsilon", &dalang_upsilon, py::arg("model"), py::arg("alpha"),
        py::arg("lam"));
  m.def("correlation_time_kernel", &correlation_time_kernel, py::arg("model"),
        py::arg("alpha"), py::arg("t"));

  py::class_<SigmaSpec>(m, "SigmaSpec")
      .def("__call__", &SigmaSpec::operator())
      .def("label", &SigmaSpec::label);
  m.def("sigma_constant", &sigma_constant);
  m.def("sigma_linear", &sigma_linear, py::arg("a"), py::arg("b") = 0.0);

  m.def(
      "kernel",
      [](const GridSpec& g, double alpha, double t) {
        KernelField k = evaluate_kernel(g, alpha, t);
        py::dict out;
        out["field"] = k.field.values;
        out["mass"] = k.mass;
        out["well_resolved"] = k.well_resolved;
        return out;
      },
      py::arg("grid"), py::arg("alpha"), py::arg("t"),
      "fundamental solution G_alpha(t, .) on the torus");

  m.def("k_beta", &k_beta, py::arg("dim"), py::arg("beta"),
        "ball-overlap constant, dual-route checked");

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("T", &SolverConfig::T)
      .def_readwrite("grid", &SolverConfig::grid)
      .def_readwrite("sigma", &SolverConfig::sigma)
      .def_readwrite("model", &SolverConfig::model)
      .def_readwrite("replicas", &SolverConfig::replicas)
      .def_readwrite("master_seed", &SolverConfig::master_seed)
      .def_readwrite("snapshot_times", &SolverConfig::snapshot_times)
      .def_readwrite("noise_substeps", &SolverConfig::noise_substeps);

  m.def(
      "simulate",
      [](const SolverConfig& cfg, int replica) {
        Trajectory tr = simulate_replica(cfg, replica);
        py::dict out;
        out["times"] = tr.times;
        py::list fields;
        for (const RealField& f : tr.fields) fields.append(f.values);
        out["fields"] = fields;
        return out;
      },
      py::arg("config"), py::arg("replica") = 0,
      "one solution path; snapshots at the configured times");

  m.def(
      "ball_average",
      [](const GridSpec& g, const std::vector<double>& values, double R) {
        return spatial_average(RealField(g, values), R);
      },
      py::arg("grid"), py::arg("values"), py::arg("R"),
      "integral of (u - 1) over the centered ball of radius R");

  m.def(
      "validate_config",
      [](const std::string& json_text) {
        ExperimentConfig cfg = parse_and_validate(json_text);
        py::dict out;
        out["config_hash"] = cfg.config_hash;
        out["kind"] = cfg.kind;
        out["canonical"] = cfg.canonical;
        return out;
      },
      py::arg("json_text"), "validate an experiment config; raises on violations");
  m.def(
      "run_experiment",
      [](const std::string& json_text) {
        ExperimentConfig cfg = parse_and_validate(json_text);
        return run_experiment(cfg);
      },
      py::arg("json_text"), "run a configured experiment; returns the exit code");
}

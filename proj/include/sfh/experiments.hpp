#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfh/battery.hpp"
#include "sfh/solver.hpp"

namespace sfh {

// JSON-configured experiment run: versioned schema, full cross-field
// validation (every violation reported, each naming the physics rule it
// breaks), canonical content hash, artifacts under
// <output_root>/<hash12>-<timestamp>/ with a checksummed MANIFEST.
struct ExperimentConfig {
  int schema_version = 1;
  std::string kind;  // kernel | noise-validate | simulate | constants | clt |
                     // fclt | tightness | inequalities | all
  SolverConfig solver;
  std::vector<double> R_list;
  std::string output_root;  // empty -> $SFH_OUTPUT_ROOT or "runs"
  int workers = 0;          // 0 -> hardware concurrency
  std::map<std::string, double> tolerance_overrides;  // discouraged; logged

  std::string canonical;    // canonical JSON (defaults filled, keys sorted)
  std::string config_hash;  // SHA-256 of `canonical`

  double tol(const std::string& name, double fallback) const;
};

// Parse + validate. Throws std::runtime_error listing ALL violations.
ExperimentConfig parse_and_validate(const std::string& json_text);
ExperimentConfig load_and_validate(const std::string& path);

// Resolved artifact directory (created by run_experiment).
std::string experiment_output_dir(const ExperimentConfig& cfg);

// Executes the configured experiment, writes CSV tables / JSON verdicts /
// binary snapshots plus MANIFEST, returns 0 iff every contract passed.
int run_experiment(const ExperimentConfig& cfg);

// RFC-4180 field quoting for CSV output.
std::string csv_quote(const std::string& field);

}  // namespace sfh

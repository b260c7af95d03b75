// Acceptance gate: runs the full pre-registered verification battery at its
// published replica counts and prints one PASS/FAIL line per criterion.
// Exit status is nonzero if any criterion fails.
#include <cstdio>

#include "sfh/battery.hpp"

int main() {
  sfh::BatteryConfig cfg;  // published defaults: 10^4-replica ensembles
  std::vector<sfh::CriterionResult> results = sfh::run_full_battery(cfg);
  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str());
    if (!r.pass) {
      ++failures;
      std::printf("%s\n", r.detail.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "sfh/experiments.hpp"
#include "sfh/sha256.hpp"

using namespace sfh;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<fs::path> run_dirs(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string tiny_kernel_config(const std::string& output_root) {
  json j = {{"kind", "kernel"},
            {"grid", {{"dim", 1}, {"half_length", 8.0}, {"points_per_axis", 256}}},
            {"solver", {{"alpha", 1.5}, {"T", 0.5}, {"snapshot_times", {0.25, 0.5}}}},
            {"output_root", output_root}};
  return j.dump();
}

}  // namespace

TEST_CASE("config hash ignores formatting and explicit defaults") {
  ExperimentConfig a = parse_and_validate(R"({"kind": "kernel"})");
  ExperimentConfig b = parse_and_validate("{\n  \"kind\":\"kernel\",\n  \"workers\": 0\n}");
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.config_hash.size() == 64);
  ExperimentConfig c = parse_and_validate(R"({"kind": "kernel", "replicas": 7})");
  CHECK(c.config_hash != a.config_hash);
}

TEST_CASE("validation reports every violation at once") {
  std::string bad = R"({
    "kind": "simulate",
    "grid": {"dim": 2, "half_length": 8.0, "points_per_axis": 256},
    "model": {"variant": "white_noise"},
    "solver": {"alpha": 0.9, "dt": 0.25, "T": 0.1}
  })";
  try {
    parse_and_validate(bad);
    FAIL("expected a validation error");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("white_noise: case (ii) requires d = 1") != std::string::npos);
    CHECK(msg.find("white_noise: case (ii) requires alpha > 1") != std::string::npos);
  }
  CHECK_THROWS(parse_and_validate(R"({"kind": "nope"})"));
  CHECK_THROWS(parse_and_validate(R"({"kind": "kernel", "surprise": 1})"));
  CHECK_THROWS(parse_and_validate("not json at all"));
}

TEST_CASE("reruns of one config produce byte-identical verdicts") {
  fs::path root = fs::temp_directory_path() / "sfh_test_rerun";
  fs::remove_all(root);
  ExperimentConfig cfg = parse_and_validate(tiny_kernel_config(root.string()));
  CHECK(run_experiment(cfg) == 0);
  // run directories are stamped to the second
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));
  CHECK(run_experiment(cfg) == 0);
  std::vector<fs::path> dirs = run_dirs(root);
  REQUIRE(dirs.size() == 2);
  CHECK(slurp(dirs[0] / "verdict.json") == slurp(dirs[1] / "verdict.json"));
  CHECK(slurp(dirs[0] / "config.json") == slurp(dirs[1] / "config.json"));

  // verdict structure
  json v = json::parse(slurp(dirs[0] / "verdict.json"));
  CHECK(v["all_pass"] == true);
  CHECK(v["complete"] == true);
  CHECK(v["kind"] == "kernel");
  CHECK(v["config_hash"] == cfg.config_hash);

  // manifest checksums match the files on disk
  json man = json::parse(slurp(dirs[0] / "MANIFEST.json"));
  CHECK(man["complete"] == true);
  for (const auto& f : man["files"]) {
    std::string name = f["name"];
    std::string sha = f["sha256"];
    CHECK(Sha256::of(slurp(dirs[0] / name)) == sha);
  }
  fs::remove_all(root);
}

TEST_CASE("csv quoting follows RFC 4180") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_quote("line\nbreak") == "\"line\nbreak\"");
}

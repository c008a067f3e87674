#include "vfp/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vfp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("vfp_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small_simulate() {
  return parse_config(R"(
[run]
experiment = simulate
[grid]
points_per_axis = 16
[hermite]
degree_cap = 6
[time]
t_end = 0.5
dt = 0.01
sample_every = 10
[initial_data]
generator = random_band
seed = 3
)");
}

}  // namespace

TEST(Io, ShortestRoundTripNumbers) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  for (double x : {1.0 / 3.0, 2.718281828459045, -6.02e23}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Io, CsvRowWidthChecked) {
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  CsvWriter w(dir / "a.csv", {"x", "y"});
  w.row({1.0, 2.0});
  EXPECT_THROW(w.row({1.0}), std::runtime_error);
}

TEST(Experiments, SimulateIsByteDeterministic) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto c = small_simulate();
  run_experiment(c, a);
  run_experiment(c, b);
  for (const char* f : {"energy.csv", "summary.json", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Experiments, SeedChangesOutput) {
  auto c = small_simulate();
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  run_experiment(c, a);
  c.initial.seed = 4;
  run_experiment(c, b);
  EXPECT_NE(slurp(a / "energy.csv"), slurp(b / "energy.csv"));
}

TEST(Experiments, ManifestEchoesConfig) {
  const auto dir = scratch("manifest");
  const auto c = small_simulate();
  run_experiment(c, dir);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j["grid"]["points_per_axis"], 16);
  EXPECT_EQ(j["initial_data"]["seed"], 3);
  EXPECT_EQ(j["system"]["gamma"], 2.0);
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(s["experiment"], "simulate");
  EXPECT_TRUE(s["passed"].get<bool>());
}

TEST(Experiments, OracleSuiteWritesPassingTable) {
  const auto dir = scratch("oracles");
  auto c = parse_config("[run]\nexperiment = oracle_suite\n");
  const auto r = run_experiment(c, dir);
  EXPECT_TRUE(r.passed);
  const auto table = slurp(dir / "oracles.csv");
  EXPECT_EQ(table.find(",fail"), std::string::npos);
  EXPECT_NE(table.find("parseval_1d"), std::string::npos);
}

TEST(Experiments, ModeSweepPasses) {
  const auto dir = scratch("sweep");
  const auto c = parse_config(R"(
[run]
experiment = mode_sweep
[grid]
space_dim = 3
points_per_axis = 8
[hermite]
degree_cap = 8
velocity_dim = 3
transverse_cap = 1
)");
  const auto r = run_experiment(c, dir);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.summary["c"].get<double>(), 0.0);
}

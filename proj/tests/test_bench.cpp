#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpci/bench.hpp"
#include "lpci/numerics.hpp"

using namespace lpci;

namespace {

TrialGrid small_grid() {
  TrialGrid grid;
  grid.scenarios = {{Family::StroblH0, Noise::Gaussian}};
  grid.n_values = {120};
  grid.d_z_values = {2};
  grid.trials = 6;
  grid.test_config.j_count = 3;
  grid.test_config.optimize_hyperparams = false;
  grid.master_seed = 777;
  grid.jobs = 2;
  return grid;
}

}  // namespace

TEST_CASE("run_grid single-trial plumbing") {
  TrialGrid grid = small_grid();
  grid.trials = 1;
  const BenchReport report = run_grid(grid);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].error.empty());
  CHECK(report.summaries.size() == 1);
  CHECK(report.summaries[0].trials == 1);
}

TEST_CASE("run_grid is deterministic across runs and worker counts") {
  TrialGrid grid = small_grid();
  const BenchReport a = run_grid(grid);
  const BenchReport b = run_grid(grid);
  grid.jobs = 1;
  const BenchReport serial = run_grid(grid);

  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(a.rows.size() == serial.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].p_value == b.rows[i].p_value);
    CHECK(a.rows[i].statistic == b.rows[i].statistic);
    CHECK(a.rows[i].p_value == serial.rows[i].p_value);
    CHECK(a.rows[i].seed == serial.rows[i].seed);
  }
}

TEST_CASE("summaries recompute exactly from raw rows") {
  TrialGrid grid = small_grid();
  grid.scenarios = {{Family::StroblH0, Noise::Gaussian}, {Family::StroblH1, Noise::Gaussian}};
  const BenchReport report = run_grid(grid);

  for (const auto& cell : report.summaries) {
    int rejected = 0;
    int total = 0;
    std::vector<double> pvalues;
    for (const auto& row : report.rows) {
      if (row.scenario == cell.scenario && row.n == cell.n && row.d_z == cell.d_z) {
        ++total;
        if (row.error.empty()) {
          if (row.reject) ++rejected;
          pvalues.push_back(row.p_value);
        }
      }
    }
    CHECK(total == cell.trials);
    const double rate = double(rejected) / double(total);
    CHECK(cell.rejection_rate == rate);
    CHECK(cell.error_rate == (cell.h0 ? rate : 1.0 - rate));
    CHECK(cell.ks == ks_uniform(pvalues));
    CHECK(cell.aupc_value == aupc(pvalues));
  }
}

TEST_CASE("per-trial failures become error rows without aborting the grid") {
  TrialGrid grid = small_grid();
  grid.n_values = {3};  // below the minimum sample size
  grid.trials = 4;
  const BenchReport report = run_grid(grid);
  REQUIRE(report.rows.size() == 4);
  for (const auto& row : report.rows) {
    CHECK(!row.error.empty());
    CHECK(!row.reject);
  }
  CHECK(report.summaries[0].errors == 4);
  CHECK(report.summaries[0].rejection_rate == 0.0);
}

TEST_CASE("calibrate_null plumbing at small rep counts") {
  ScenarioSpec scenario{Family::IllusH0, 80, 2, Noise::Gaussian, 5150};
  TestConfig config;
  config.j_count = 3;
  const CalibrationResult oracle = calibrate_null(scenario, 10, config, true, 2);
  CHECK(oracle.statistics.size() == 10);
  CHECK(std::isfinite(oracle.ks_against_chi2));

  config.optimize_hyperparams = false;
  const CalibrationResult rls = calibrate_null(scenario, 5, config, false, 2);
  CHECK(rls.statistics.size() == 5);

  TestConfig bad = config;
  bad.p = 1;
  CHECK_THROWS_AS(calibrate_null(scenario, 5, bad, true), DomainError);
  ScenarioSpec wrong = scenario;
  wrong.family = Family::StroblH0;
  CHECK_THROWS_AS(calibrate_null(wrong, 5, config, true), DomainError);
}

TEST_CASE("rank sweep at ratio one reproduces the full-rank grid") {
  TrialGrid grid = small_grid();
  grid.trials = 4;
  const BenchReport full = run_grid(grid);

  const BenchReport sweep =
      rank_sweep(grid.scenarios, {1.0}, grid.n_values, grid.d_z_values[0], grid.trials,
                 grid.test_config, grid.master_seed, grid.jobs);
  REQUIRE(sweep.rows.size() == full.rows.size());
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    CHECK(sweep.rows[i].p_value == full.rows[i].p_value);
    CHECK(sweep.rows[i].statistic == full.rows[i].statistic);
  }
}

TEST_CASE("rank sweep shares datasets across ratios") {
  TrialGrid grid = small_grid();
  grid.trials = 3;
  const BenchReport sweep =
      rank_sweep(grid.scenarios, {0.5, 1.0}, grid.n_values, grid.d_z_values[0],
                 grid.trials, grid.test_config, grid.master_seed, grid.jobs);
  REQUIRE(sweep.rows.size() == 6);
  // Same trial index => same derived seed regardless of ratio.
  for (int t = 0; t < 3; ++t) {
    CHECK(sweep.rows[static_cast<std::size_t>(t)].seed ==
          sweep.rows[static_cast<std::size_t>(3 + t)].seed);
  }
  CHECK(sweep.rows[0].scenario != sweep.rows[3].scenario);
  CHECK_THROWS_AS(rank_sweep(grid.scenarios, {1.5}, grid.n_values, 2, 2,
                             grid.test_config, 1, 1),
                  DomainError);
}

TEST_CASE("report serialization carries the version header") {
  TrialGrid grid = small_grid();
  grid.trials = 2;
  const BenchReport report = run_grid(grid);
  const std::string csv_path = "/tmp/lpci_test_rows.csv";
  const std::string json_path = "/tmp/lpci_test_summary.json";
  write_rows_csv(csv_path, report.rows);
  write_summary_json(json_path, report);

  std::ifstream csv(csv_path);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "# format_version: 1");
  std::getline(csv, line);
  CHECK(line == "scenario,n,d_z,trial,seed,p_value,statistic,reject,runtime_ms,error");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);

  std::ifstream json(json_path);
  std::stringstream buffer;
  buffer << json.rdbuf();
  CHECK(buffer.str().find("\"format_version\": 1") != std::string::npos);
  std::remove(csv_path.c_str());
  std::remove(json_path.c_str());
}

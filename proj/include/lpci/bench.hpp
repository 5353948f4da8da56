#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lpci/ci.hpp"
#include "lpci/synthetic.hpp"

namespace lpci {

/// Grid of benchmark cells: every (scenario, n, d_z) combination runs
/// `trials` independent tests. Trial seeds are hashed from (master_seed,
/// scenario, n, d_z, trial), so results do not depend on enumeration or
/// execution order. jobs = 0 means one worker per hardware thread.
struct TrialGrid {
  std::vector<std::pair<Family, Noise>> scenarios;
  std::vector<int> n_values;
  std::vector<int> d_z_values;
  int trials = 100;
  TestConfig test_config;
  std::uint64_t master_seed = 0;
  int jobs = 0;
};

struct TrialRow {
  std::string scenario;
  int n = 0;
  int d_z = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double p_value = 0.0;
  double statistic = 0.0;
  bool reject = false;
  double runtime_ms = 0.0;
  std::string error;        // empty for successful trials
  double ratio = 1.0;       // regression rank / n (rank sweeps only)
  bool h0 = true;
};

struct CellSummary {
  std::string scenario;
  int n = 0;
  int d_z = 0;
  double ratio = 1.0;
  bool h0 = true;
  int trials = 0;
  int errors = 0;
  double rejection_rate = 0.0;
  double error_rate = 0.0;  // type-I for h0 cells, type-II for h1 cells
  double ks = 0.0;
  double aupc_value = 0.0;
  double mean_runtime_ms = 0.0;
};

struct BenchReport {
  std::vector<TrialRow> rows;
  std::vector<CellSummary> summaries;
};

/// Per-cell summaries recomputed from raw rows (errors count as
/// non-rejections and are excluded from the p-value statistics).
std::vector<CellSummary> summarize(const std::vector<TrialRow>& rows);

/// Runs every cell of the grid; per-trial failures become error rows and
/// never abort the grid. Deterministic for a fixed grid regardless of the
/// worker count.
BenchReport run_grid(const TrialGrid& grid);

struct CalibrationResult {
  std::vector<double> statistics;
  double ks_against_chi2 = 0.0;
};

/// Null-recovery run: `reps` independent datasets from an illustration
/// scenario, each tested with the oracle conditional means (use_oracle) or
/// the fitted regressions, collecting the n * NCI statistics and their KS
/// distance to the chi-square(J) CDF. Requires p = 2.
CalibrationResult calibrate_null(const ScenarioSpec& scenario, int reps,
                                 const TestConfig& config, bool use_oracle, int jobs = 0);

/// Grid over rank ratios: r = ceil(ratio * n). Trial seeds ignore the
/// ratio, so ratio 1.0 reproduces run_grid with the full rank bit for bit
/// and different ratios see identical datasets.
BenchReport rank_sweep(const std::vector<std::pair<Family, Noise>>& scenarios,
                       const std::vector<double>& ratios, const std::vector<int>& n_values,
                       int d_z, int trials, const TestConfig& config,
                       std::uint64_t master_seed, int jobs = 0);

/// Report serialization (format_version 1).
void write_rows_csv(const std::string& path, const std::vector<TrialRow>& rows);
void write_summary_json(const std::string& path, const BenchReport& report);

}  // namespace lpci

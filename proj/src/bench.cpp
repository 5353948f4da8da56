#include "lpci/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "lpci/numerics.hpp"

namespace lpci {

namespace {

using Clock = std::chrono::steady_clock;

std::string scenario_label(Family family, Noise noise) {
  return family_name(family) + "/" + noise_name(noise);
}

std::uint64_t trial_seed(std::uint64_t master, Family family, Noise noise, int n, int d_z,
                         int trial) {
  std::uint64_t h = hash_combine(master, static_cast<std::uint64_t>(family) + 1);
  h = hash_combine(h, static_cast<std::uint64_t>(noise) + 1);
  h = hash_combine(h, static_cast<std::uint64_t>(n));
  h = hash_combine(h, static_cast<std::uint64_t>(d_z));
  return hash_combine(h, static_cast<std::uint64_t>(trial));
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

TrialRow run_one_trial(Family family, Noise noise, int n, int d_z, int trial,
                       std::uint64_t master, const TestConfig& base_config, double ratio) {
  TrialRow row;
  row.scenario = scenario_label(family, noise);
  row.n = n;
  row.d_z = d_z;
  row.trial = trial;
  row.seed = trial_seed(master, family, noise, n, d_z, trial);
  row.ratio = ratio;
  row.h0 = is_h0(family);
  if (ratio != 1.0) {
    row.scenario += "@ratio=" + std::to_string(ratio).substr(0, 4);
  }

  try {
    const Rng trial_rng(row.seed);
    ScenarioSpec spec{family, n, d_z, noise, trial_rng.child(0).seed()};
    const Dataset data = generate(spec);

    TestConfig config = base_config;
    config.seed = trial_rng.child(1).seed();
    if (ratio != 1.0) {
      config.rank = static_cast<int>(std::ceil(ratio * n));
    }

    const auto t0 = Clock::now();
    const TestResult result = run_test(data.x, data.y, data.z, config);
    row.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    row.p_value = result.p_value;
    row.statistic = result.statistic;
    row.reject = result.reject;
  } catch (const std::exception& e) {
    row.error = e.what();
    row.reject = false;
    row.p_value = std::numeric_limits<double>::quiet_NaN();
    row.statistic = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<TrialRow>& rows) {
  using Key = std::tuple<std::string, int, int>;
  std::map<Key, CellSummary> cells;
  std::vector<Key> order;

  for (const auto& row : rows) {
    const Key key{row.scenario, row.n, row.d_z};
    auto it = cells.find(key);
    if (it == cells.end()) {
      CellSummary cell;
      cell.scenario = row.scenario;
      cell.n = row.n;
      cell.d_z = row.d_z;
      cell.ratio = row.ratio;
      cell.h0 = row.h0;
      it = cells.emplace(key, cell).first;
      order.push_back(key);
    }
    CellSummary& cell = it->second;
    ++cell.trials;
    if (!row.error.empty()) {
      ++cell.errors;
    } else {
      if (row.reject) cell.rejection_rate += 1.0;  // accumulate counts first
      cell.mean_runtime_ms += row.runtime_ms;
    }
  }

  std::map<Key, std::vector<double>> pvalues;
  for (const auto& row : rows) {
    if (row.error.empty()) {
      pvalues[Key{row.scenario, row.n, row.d_z}].push_back(row.p_value);
    }
  }

  std::vector<CellSummary> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    CellSummary cell = cells[key];
    const int ok = cell.trials - cell.errors;
    cell.rejection_rate = cell.trials > 0 ? cell.rejection_rate / cell.trials : 0.0;
    cell.error_rate = cell.h0 ? cell.rejection_rate : 1.0 - cell.rejection_rate;
    cell.mean_runtime_ms = ok > 0 ? cell.mean_runtime_ms / ok : 0.0;
    const auto& pv = pvalues[key];
    cell.ks = pv.empty() ? std::numeric_limits<double>::quiet_NaN() : ks_uniform(pv);
    cell.aupc_value = pv.empty() ? std::numeric_limits<double>::quiet_NaN() : aupc(pv);
    out.push_back(std::move(cell));
  }
  return out;
}

BenchReport run_grid(const TrialGrid& grid) {
  if (grid.scenarios.empty() || grid.n_values.empty() || grid.d_z_values.empty() ||
      grid.trials < 1) {
    throw DomainError("run_grid: grid must be nonempty");
  }

  struct Task {
    Family family;
    Noise noise;
    int n;
    int d_z;
    int trial;
  };
  std::vector<Task> tasks;
  for (const auto& [family, noise] : grid.scenarios) {
    for (int n : grid.n_values) {
      for (int d_z : grid.d_z_values) {
        for (int t = 0; t < grid.trials; ++t) {
          tasks.push_back(Task{family, noise, n, d_z, t});
        }
      }
    }
  }

  BenchReport report;
  report.rows.resize(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), grid.jobs, [&](int i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    report.rows[static_cast<std::size_t>(i)] =
        run_one_trial(task.family, task.noise, task.n, task.d_z, task.trial,
                      grid.master_seed, grid.test_config, 1.0);
  });
  report.summaries = summarize(report.rows);
  return report;
}

CalibrationResult calibrate_null(const ScenarioSpec& scenario, int reps,
                                 const TestConfig& config, bool use_oracle, int jobs) {
  if (config.p != 2) {
    throw DomainError("calibrate_null: the chi-square comparison requires p = 2");
  }
  if (!is_illustration(scenario.family)) {
    throw DomainError("calibrate_null: oracle conditional means exist only for the "
                      "illustration models");
  }
  if (reps < 1) throw DomainError("calibrate_null: reps must be >= 1");

  CalibrationResult out;
  out.statistics.assign(static_cast<std::size_t>(reps), 0.0);
  std::vector<std::string> errors(static_cast<std::size_t>(reps));

  parallel_for(reps, jobs, [&](int rep) {
    try {
      const Rng rep_rng(hash_combine(scenario.rng_seed, static_cast<std::uint64_t>(rep)));
      ScenarioSpec data_spec = scenario;
      data_spec.rng_seed = rep_rng.child(0).seed();
      const Dataset data = generate(data_spec);

      TestConfig rep_config = config;
      rep_config.seed = rep_rng.child(1).seed();

      TestResult result;
      if (use_oracle) {
        const KernelSpec spec = median_kernel_spec(data.x, data.y, data.z);
        const LocationSet locations = test_locations(data.x, data.y, data.z, rep_config);
        const Family family = scenario.family;
        const CondMeanFn cond_x = [&](int j, const VectorRef& zi) {
          return oracle_cond_mean_xddot(locations.t1.row(j), zi, family, spec);
        };
        const CondMeanFn cond_y = [&](int j, const VectorRef& zi) {
          return oracle_cond_mean_y(locations.t2(j, 0), zi, family, spec.sigma_y);
        };
        result = run_oracle_test(data.x, data.y, data.z, rep_config, cond_x, cond_y);
      } else {
        result = run_test(data.x, data.y, data.z, rep_config);
      }
      out.statistics[static_cast<std::size_t>(rep)] = result.statistic;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(rep)] = e.what();
    }
  });

  for (const auto& err : errors) {
    if (!err.empty()) throw SolveFailure("calibrate_null: trial failed: " + err);
  }
  const int dof = config.j_count;
  out.ks_against_chi2 =
      ks_distance(out.statistics, [dof](double v) { return chi2_cdf(dof, v); });
  return out;
}

BenchReport rank_sweep(const std::vector<std::pair<Family, Noise>>& scenarios,
                       const std::vector<double>& ratios, const std::vector<int>& n_values,
                       int d_z, int trials, const TestConfig& config,
                       std::uint64_t master_seed, int jobs) {
  if (scenarios.empty() || ratios.empty() || n_values.empty() || trials < 1) {
    throw DomainError("rank_sweep: grid must be nonempty");
  }
  for (double ratio : ratios) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
      throw DomainError("rank_sweep: ratios must lie in (0, 1]");
    }
  }

  struct Task {
    Family family;
    Noise noise;
    double ratio;
    int n;
    int trial;
  };
  std::vector<Task> tasks;
  for (const auto& [family, noise] : scenarios) {
    for (double ratio : ratios) {
      for (int n : n_values) {
        for (int t = 0; t < trials; ++t) {
          tasks.push_back(Task{family, noise, ratio, n, t});
        }
      }
    }
  }

  BenchReport report;
  report.rows.resize(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    report.rows[static_cast<std::size_t>(i)] =
        run_one_trial(task.family, task.noise, task.n, d_z, task.trial, master_seed,
                      config, task.ratio);
  });
  report.summaries = summarize(report.rows);
  return report;
}

namespace {

std::string sanitize_csv_field(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_rows_csv(const std::string& path, const std::vector<TrialRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out << "# format_version: 1\n";
  out << "scenario,n,d_z,trial,seed,p_value,statistic,reject,runtime_ms,error\n";
  for (const auto& row : rows) {
    out << sanitize_csv_field(row.scenario) << ',' << row.n << ',' << row.d_z << ','
        << row.trial << ',' << row.seed << ',' << format_double(row.p_value) << ','
        << format_double(row.statistic) << ',' << (row.reject ? "true" : "false") << ','
        << format_double(row.runtime_ms) << ',' << sanitize_csv_field(row.error) << '\n';
  }
}

void write_summary_json(const std::string& path, const BenchReport& report) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["cells"] = nlohmann::json::array();
  for (const auto& cell : report.summaries) {
    nlohmann::json entry;
    entry["scenario"] = cell.scenario;
    entry["n"] = cell.n;
    entry["d_z"] = cell.d_z;
    entry["ratio"] = cell.ratio;
    entry["trials"] = cell.trials;
    entry["errors"] = cell.errors;
    entry["rejection_rate"] = cell.rejection_rate;
    entry[cell.h0 ? "type1_error" : "type2_error"] = cell.error_rate;
    entry["ks"] = cell.ks;
    entry["aupc"] = cell.aupc_value;
    entry["mean_runtime_ms"] = cell.mean_runtime_ms;
    doc["cells"].push_back(entry);
  }
  std::ofstream out(path);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace lpci

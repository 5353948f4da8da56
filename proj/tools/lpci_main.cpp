// Command-line front end: run a conditional or unconditional independence
// test on a data file, run benchmark grids, or run null calibration.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpci/bench.hpp"
#include "lpci/ci.hpp"
#include "lpci/data_io.hpp"
#include "lpci/ind.hpp"
#include "lpci/synthetic.hpp"

namespace {

constexpr int kInputError = 2;

int parse_rank(const std::string& text) {
  if (text == "full") return lpci::kFullRank;
  try {
    const int value = std::stoi(text);
    if (value < 1) throw std::invalid_argument("rank");
    return value;
  } catch (const std::exception&) {
    throw lpci::DomainError("--rank expects 'full' or a positive integer, got '" + text +
                            "'");
  }
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("KCI_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

void write_test_report(const std::string& path, const std::string& format,
                       const std::string& mode, const lpci::TestResult& result,
                       const lpci::TestConfig& config) {
  if (format == "json") {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["mode"] = mode;
    doc["p"] = config.p;
    doc["locations"] = config.j_count;
    doc["alpha"] = config.alpha;
    doc["seed"] = config.seed;
    doc["statistic"] = result.statistic;
    doc["threshold"] = result.threshold;
    doc["p_value"] = result.p_value;
    doc["reject"] = result.reject;
    doc["diagnostics"]["sigma_x"] = result.diagnostics.sigma_x;
    doc["diagnostics"]["sigma_y"] = result.diagnostics.sigma_y;
    doc["diagnostics"]["sigma_z"] = result.diagnostics.sigma_z;
    doc["diagnostics"]["resolved_rank"] = result.diagnostics.resolved_rank;
    doc["diagnostics"]["selected_sigma"] = result.diagnostics.selected_sigma;
    doc["diagnostics"]["selected_lambda"] = result.diagnostics.selected_lambda;
    std::vector<double> witness(result.diagnostics.witness_means.begin(),
                                result.diagnostics.witness_means.end());
    doc["diagnostics"]["witness_means"] = witness;
    if (config.p != 2) doc["mc_samples"] = config.mc_samples;
    std::ofstream out(path);
    if (!out) throw lpci::DataFormatError("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw lpci::DataFormatError("cannot open for writing: " + path);
  out << "# format_version: 1\n";
  out << "mode,p,locations,alpha,seed,statistic,threshold,p_value,reject\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.17g,%llu,%.17g,%.17g,%.17g,%s\n",
                mode.c_str(), config.p, config.j_count, config.alpha,
                static_cast<unsigned long long>(config.seed), result.statistic,
                result.threshold, result.p_value, result.reject ? "true" : "false");
  out << buf;
}

struct TestFlags {
  std::string data_path;
  std::string mode = "conditional";
  std::string rank = "full";
  std::string out_path;
  std::string format = "json";
  lpci::TestConfig config;
};

int cmd_test(const TestFlags& flags) {
  lpci::TestConfig config = flags.config;
  config.rank = parse_rank(flags.rank);

  const lpci::DataFile data = lpci::read_data_csv(flags.data_path);
  lpci::TestResult result;
  if (flags.mode == "conditional") {
    result = lpci::run_test(data.x, data.y, data.z, config);
  } else if (flags.mode == "independence") {
    result = lpci::run_ind_test(data.x, data.y, config);
  } else {
    throw lpci::DomainError("--mode expects conditional or independence");
  }

  std::printf("mode:       %s\n", flags.mode.c_str());
  std::printf("statistic:  %.10g\n", result.statistic);
  std::printf("threshold:  %.10g (alpha = %g)\n", result.threshold, config.alpha);
  std::printf("p_value:    %.10g\n", result.p_value);
  std::printf("reject:     %s\n", result.reject ? "true" : "false");
  if (config.p != 2) {
    std::printf("null:       Monte Carlo, mc_samples = %d\n", config.mc_samples);
  }
  if (!flags.out_path.empty()) {
    write_test_report(flags.out_path, flags.format, flags.mode, result, config);
  }
  return 0;
}

struct BenchFlags {
  std::string config_path;
  std::string scenarios;
  std::string noise = "gaussian";
  std::string n_values = "500";
  std::string d_z_values = "1";
  std::string ratios;
  int trials = 100;
  int d_z_sweep = 3;
  std::string out_prefix = "bench_report";
  int jobs = 0;
  std::string rank = "full";
  lpci::TestConfig config;
  std::uint64_t master_seed = 0;
};

template <typename T>
std::vector<T> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  for (const auto& item : lpci::KeyValueConfig::split_list(text)) {
    try {
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(std::stoi(item));
      } else {
        out.push_back(std::stod(item));
      }
    } catch (const std::exception&) {
      throw lpci::DataFormatError("cannot parse " + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw lpci::DataFormatError(what + " list is empty");
  return out;
}

void apply_config_file(BenchFlags& flags) {
  const lpci::KeyValueConfig kv = lpci::KeyValueConfig::parse_file(flags.config_path);
  flags.scenarios = kv.require("scenarios");
  flags.noise = kv.get_or("noise", flags.noise);
  flags.n_values = kv.get_or("n_values", flags.n_values);
  flags.d_z_values = kv.get_or("d_z_values", flags.d_z_values);
  flags.ratios = kv.get_or("ratios", flags.ratios);
  flags.trials = std::stoi(kv.get_or("trials", std::to_string(flags.trials)));
  flags.rank = kv.get_or("rank", flags.rank);
  flags.config.p = std::stoi(kv.get_or("p", std::to_string(flags.config.p)));
  flags.config.j_count =
      std::stoi(kv.get_or("locations", std::to_string(flags.config.j_count)));
  flags.config.alpha = std::stod(kv.get_or("alpha", std::to_string(flags.config.alpha)));
  flags.config.delta = std::stod(kv.get_or("delta", std::to_string(flags.config.delta)));
  flags.config.mc_samples =
      std::stoi(kv.get_or("mc_samples", std::to_string(flags.config.mc_samples)));
  const std::string optimize = kv.get_or("optimize", "");
  if (!optimize.empty()) {
    flags.config.optimize_hyperparams = (optimize == "true" || optimize == "1");
  }
  flags.master_seed = std::stoull(kv.get_or("seed", std::to_string(flags.master_seed)));
  flags.jobs = std::stoi(kv.get_or("jobs", std::to_string(flags.jobs)));
  flags.d_z_sweep = std::stoi(kv.get_or("d_z_sweep", std::to_string(flags.d_z_sweep)));
}

int cmd_bench(BenchFlags flags) {
  if (!flags.config_path.empty()) apply_config_file(flags);
  if (flags.scenarios.empty()) {
    throw lpci::DataFormatError("missing required config key: scenarios");
  }

  const lpci::Noise noise = lpci::parse_noise(flags.noise);
  std::vector<std::pair<lpci::Family, lpci::Noise>> scenarios;
  for (const auto& name : lpci::KeyValueConfig::split_list(flags.scenarios)) {
    scenarios.emplace_back(lpci::parse_family(name), noise);
  }
  if (scenarios.empty()) throw lpci::DataFormatError("scenarios list is empty");

  lpci::TestConfig config = flags.config;
  config.rank = parse_rank(flags.rank);

  lpci::BenchReport report;
  if (!flags.ratios.empty()) {
    report = lpci::rank_sweep(scenarios, parse_number_list<double>(flags.ratios, "ratios"),
                              parse_number_list<int>(flags.n_values, "n_values"),
                              flags.d_z_sweep, flags.trials, config, flags.master_seed,
                              flags.jobs);
  } else {
    lpci::TrialGrid grid;
    grid.scenarios = scenarios;
    grid.n_values = parse_number_list<int>(flags.n_values, "n_values");
    grid.d_z_values = parse_number_list<int>(flags.d_z_values, "d_z_values");
    grid.trials = flags.trials;
    grid.test_config = config;
    grid.master_seed = flags.master_seed;
    grid.jobs = flags.jobs;
    report = lpci::run_grid(grid);
  }

  lpci::write_rows_csv(flags.out_prefix + ".csv", report.rows);
  lpci::write_summary_json(flags.out_prefix + ".json", report);

  std::printf("%-32s %6s %4s %6s %8s %8s %8s %10s %7s\n", "scenario", "n", "d_z",
              "trials", "err_rate", "ks", "aupc", "mean_ms", "errors");
  for (const auto& cell : report.summaries) {
    std::printf("%-32s %6d %4d %6d %8.3f %8.3f %8.3f %10.1f %7d\n",
                cell.scenario.c_str(), cell.n, cell.d_z, cell.trials, cell.error_rate,
                cell.ks, cell.aupc_value, cell.mean_runtime_ms, cell.errors);
  }
  std::printf("wrote %s.csv and %s.json\n", flags.out_prefix.c_str(),
              flags.out_prefix.c_str());
  return 0;
}

struct CalibrateFlags {
  std::string family = "illus_h0";
  int n = 1000;
  int d_z = 5;
  int reps = 1000;
  std::string estimator = "oracle";
  std::string out_path;
  int jobs = 0;
  lpci::TestConfig config;
  std::uint64_t seed = 0;
};

int cmd_calibrate(const CalibrateFlags& flags) {
  if (flags.config.p != 2) {
    throw lpci::DomainError("calibrate requires p = 2 (chi-square comparison path)");
  }
  if (flags.estimator != "oracle" && flags.estimator != "rls") {
    throw lpci::DomainError("--estimator expects oracle or rls");
  }
  lpci::ScenarioSpec scenario;
  scenario.family = lpci::parse_family(flags.family);
  scenario.n = flags.n;
  scenario.d_z = flags.d_z;
  scenario.noise = lpci::Noise::Gaussian;
  scenario.rng_seed = flags.seed;

  const lpci::CalibrationResult result = lpci::calibrate_null(
      scenario, flags.reps, flags.config, flags.estimator == "oracle", flags.jobs);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!flags.out_path.empty()) {
    file.open(flags.out_path);
    if (!file) throw lpci::DataFormatError("cannot open for writing: " + flags.out_path);
    out = &file;
  }
  char buf[64];
  for (double stat : result.statistics) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", stat);
    *out << buf;
  }
  std::snprintf(buf, sizeof(buf), "# ks_vs_chi2(%d) = %.6f\n", flags.config.j_count,
                result.ks_against_chi2);
  *out << buf;
  if (!flags.out_path.empty()) {
    std::printf("wrote %zu statistics to %s; ks_vs_chi2(%d) = %.6f\n",
                result.statistics.size(), flags.out_path.c_str(), flags.config.j_count,
                result.ks_against_chi2);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lp-distance kernel embedding tests for conditional and unconditional "
               "independence"};
  app.require_subcommand(1);

  TestFlags test_flags;
  test_flags.config.seed = default_seed();
  CLI::App* test = app.add_subcommand("test", "Run a test on a CSV data file");
  test->add_option("--data", test_flags.data_path, "Data CSV (columns x1.., z1.., y1..)")
      ->required();
  test->add_option("--alpha", test_flags.config.alpha, "Test level")->capture_default_str();
  test->add_option("--p", test_flags.config.p, "lp exponent")->capture_default_str();
  test->add_option("--locations", test_flags.config.j_count, "Number of test locations")->capture_default_str();
  test->add_option("--rank", test_flags.rank, "Regression rank: 'full' or integer")->capture_default_str();
  test->add_option("--delta", test_flags.config.delta, "Whitening ridge")->capture_default_str();
  test->add_option("--seed", test_flags.config.seed, "Random seed")->capture_default_str()
      ->envname("KCI_SEED");
  test->add_option("--optimize-hyperparams", test_flags.config.optimize_hyperparams,
                   "Tune regression hyperparameters by GP evidence")->capture_default_str();
  test->add_option("--mode", test_flags.mode, "conditional | independence")->capture_default_str()
      ->check(CLI::IsMember({"conditional", "independence"}));
  test->add_option("--mc-samples", test_flags.config.mc_samples,
                   "Null Monte Carlo draws (p != 2)")->capture_default_str();
  test->add_option("--out", test_flags.out_path, "Write a report file");
  test->add_option("--format", test_flags.format, "Report format")->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  BenchFlags bench_flags;
  bench_flags.master_seed = default_seed();
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark grid");
  bench->add_option("--config", bench_flags.config_path,
                    "Key-value config file (overrides inline flags)");
  bench->add_option("--scenarios", bench_flags.scenarios,
                    "Comma list: strobl_h0,strobl_h1,li_h0,li_h1,illus_h0,illus_h1");
  bench->add_option("--noise", bench_flags.noise, "gaussian | laplace | mixture")->capture_default_str();
  bench->add_option("--n-values", bench_flags.n_values, "Comma list of sample sizes")->capture_default_str();
  bench->add_option("--dz-values", bench_flags.d_z_values, "Comma list of z dimensions")->capture_default_str();
  bench->add_option("--ratios", bench_flags.ratios,
                    "Rank ratios in (0,1]; presence switches to a rank sweep");
  bench->add_option("--dz-sweep", bench_flags.d_z_sweep, "z dimension for rank sweeps")->capture_default_str();
  bench->add_option("--trials", bench_flags.trials, "Trials per cell")->capture_default_str();
  bench->add_option("--alpha", bench_flags.config.alpha, "Test level")->capture_default_str();
  bench->add_option("--p", bench_flags.config.p, "lp exponent")->capture_default_str();
  bench->add_option("--locations", bench_flags.config.j_count, "Number of test locations")->capture_default_str();
  bench->add_option("--rank", bench_flags.rank, "Regression rank: 'full' or integer")->capture_default_str();
  bench->add_option("--optimize-hyperparams", bench_flags.config.optimize_hyperparams,
                    "Tune regression hyperparameters by GP evidence")->capture_default_str();
  bench->add_option("--seed", bench_flags.master_seed, "Master seed")->capture_default_str()
      ->envname("KCI_SEED");
  bench->add_option("--jobs", bench_flags.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  bench->add_option("--out", bench_flags.out_prefix, "Report path prefix")->capture_default_str();

  CalibrateFlags cal_flags;
  cal_flags.seed = default_seed();
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Null-distribution recovery statistics");
  calibrate->add_option("--family", cal_flags.family, "illus_h0 | illus_h1")->capture_default_str()
      ->check(CLI::IsMember({"illus_h0", "illus_h1"}));
  calibrate->add_option("--n", cal_flags.n, "Samples per repetition")->capture_default_str();
  calibrate->add_option("--dz", cal_flags.d_z, "z dimension")->capture_default_str();
  calibrate->add_option("--reps", cal_flags.reps, "Repetitions")->capture_default_str();
  calibrate->add_option("--estimator", cal_flags.estimator, "oracle | rls")->capture_default_str();
  calibrate->add_option("--p", cal_flags.config.p, "lp exponent (must be 2)")->capture_default_str();
  calibrate->add_option("--locations", cal_flags.config.j_count,
                        "Number of test locations")->capture_default_str();
  calibrate->add_option("--seed", cal_flags.seed, "Master seed")->capture_default_str()
      ->envname("KCI_SEED");
  calibrate->add_option("--jobs", cal_flags.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  calibrate->add_option("--out", cal_flags.out_path, "Write statistics to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << std::endl;
    return kInputError;
  }

  try {
    if (test->parsed()) return cmd_test(test_flags);
    if (bench->parsed()) return cmd_bench(bench_flags);
    if (calibrate->parsed()) return cmd_calibrate(cal_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kInputError;
  }
  return 0;
}

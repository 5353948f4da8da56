#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lpci/ci.hpp"
#include "lpci/data_io.hpp"
#include "lpci/synthetic.hpp"

using namespace lpci;

namespace {

int run_cli(const std::string& args) {
  const std::string command = std::string(LPCI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("data csv round trip is exact and preserves test output") {
  const ScenarioSpec spec{Family::IllusH0, 60, 2, Noise::Gaussian, 808};
  const Dataset data = generate(spec);
  const std::string path = "/tmp/lpci_roundtrip.csv";
  write_data_csv(path, data.x, data.z, data.y);
  const DataFile loaded = read_data_csv(path);

  CHECK((loaded.x - data.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.z - data.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.y - data.y).cwiseAbs().maxCoeff() == 0.0);

  TestConfig config;
  config.j_count = 3;
  config.seed = 424242;
  config.optimize_hyperparams = false;
  const TestResult direct = run_test(data.x, data.y, data.z, config);
  const TestResult reloaded = run_test(loaded.x, loaded.y, loaded.z, config);
  CHECK(direct.p_value == reloaded.p_value);
  CHECK(direct.statistic == reloaded.statistic);
  std::remove(path.c_str());
}

TEST_CASE("data csv errors name the offending location") {
  const std::string path = "/tmp/lpci_bad.csv";

  {
    std::ofstream out(path);
    out << "x1,z1,y1\n0.5,1.0,2.0\n0.1,nan,0.3\n";
  }
  try {
    read_data_csv(path);
    FAIL("expected DataFormatError");
  } catch (const DataFormatError& e) {
    const std::string message = e.what();
    CHECK(message.find("row 2") != std::string::npos);
    CHECK(message.find("z1") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << "x1,y1\n1.0,2.0\n";  // z block missing
  }
  CHECK_THROWS_AS(read_data_csv(path), DataFormatError);

  {
    std::ofstream out(path);
    out << "x1,z1,y1\n1.0,2.0\n";  // short row
  }
  CHECK_THROWS_AS(read_data_csv(path), DataFormatError);
  std::remove(path.c_str());
}

TEST_CASE("key-value config parsing") {
  const KeyValueConfig kv = KeyValueConfig::parse_text(
      "# comment line\n"
      "scenarios = strobl_h0, strobl_h1  # trailing comment\n"
      "trials=25\n"
      "\n"
      "n_values = 100,200\n");
  CHECK(kv.require("trials") == "25");
  const auto list = KeyValueConfig::split_list(kv.require("scenarios"));
  REQUIRE(list.size() == 2);
  CHECK(list[0] == "strobl_h0");
  CHECK(list[1] == "strobl_h1");
  CHECK(kv.get_or("missing", "fallback") == "fallback");

  try {
    kv.require("master_seed");
    FAIL("expected DataFormatError");
  } catch (const DataFormatError& e) {
    CHECK(std::string(e.what()).find("master_seed") != std::string::npos);
  }
  CHECK_THROWS_AS(KeyValueConfig::parse_text("just words\n"), DataFormatError);
}

TEST_CASE("cli help and error exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("test --help") == 0);
  CHECK(run_cli("bench --help") == 0);
  CHECK(run_cli("calibrate --help") == 0);
  CHECK(run_cli("test --no-such-flag") == 2);
  CHECK(run_cli("test") == 2);                       // missing required --data
  CHECK(run_cli("frobnicate") == 2);                 // unknown subcommand
  CHECK(run_cli("calibrate --p 1 --reps 2") == 2);   // chi-square path only
}

TEST_CASE("cli test run matches the library bitwise") {
  const ScenarioSpec spec{Family::IllusH0, 60, 2, Noise::Gaussian, 99};
  const Dataset data = generate(spec);
  const std::string data_path = "/tmp/lpci_cli_data.csv";
  const std::string report_path = "/tmp/lpci_cli_report.json";
  write_data_csv(data_path, data.x, data.z, data.y);

  TestConfig config;
  config.seed = 31337;
  config.j_count = 4;
  const TestResult expected = run_test(data.x, data.y, data.z, config);

  const int code = run_cli("test --data " + data_path +
                           " --seed 31337 --locations 4 --out " + report_path);
  CHECK(code == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(report_path));
  CHECK(doc["p_value"].get<double>() == expected.p_value);
  CHECK(doc["statistic"].get<double>() == expected.statistic);
  CHECK(doc["reject"].get<bool>() == expected.reject);

  std::remove(data_path.c_str());
  std::remove(report_path.c_str());
}

TEST_CASE("cli surfaces data errors with exit code 2") {
  const std::string path = "/tmp/lpci_cli_nan.csv";
  {
    std::ofstream out(path);
    out << "x1,z1,y1\n0.5,1.0,2.0\n0.1,nan,0.3\n";
  }
  CHECK(run_cli("test --data " + path) == 2);
  std::remove(path.c_str());
}

TEST_CASE("cli p=3 runs on the Monte Carlo null and reports mc_samples") {
  const ScenarioSpec spec{Family::StroblH0, 60, 1, Noise::Gaussian, 17};
  const Dataset data = generate(spec);
  const std::string data_path = "/tmp/lpci_cli_p3.csv";
  const std::string report_path = "/tmp/lpci_cli_p3.json";
  write_data_csv(data_path, data.x, data.z, data.y);

  const int code = run_cli("test --data " + data_path +
                           " --p 3 --locations 2 --seed 5 --mc-samples 20000 "
                           "--optimize-hyperparams false --out " + report_path);
  CHECK(code == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(report_path));
  CHECK(doc["mc_samples"].get<int>() == 20000);

  TestConfig config;
  config.p = 3;
  config.j_count = 2;
  config.seed = 5;
  config.mc_samples = 20000;
  config.optimize_hyperparams = false;
  const TestResult expected = run_test(data.x, data.y, data.z, config);
  CHECK(doc["threshold"].get<double>() == expected.threshold);

  std::remove(data_path.c_str());
  std::remove(report_path.c_str());
}

TEST_CASE("cli bench writes reports from a config file") {
  const std::string config_path = "/tmp/lpci_bench.conf";
  const std::string prefix = "/tmp/lpci_bench_report";
  {
    std::ofstream out(config_path);
    out << "# tiny smoke grid\n"
        << "scenarios = strobl_h0\n"
        << "n_values = 80\n"
        << "d_z_values = 2\n"
        << "trials = 2\n"
        << "optimize = false\n"
        << "locations = 3\n"
        << "seed = 9\n"
        << "jobs = 2\n";
  }
  CHECK(run_cli("bench --config " + config_path + " --out " + prefix) == 0);
  const std::string csv = slurp(prefix + ".csv");
  CHECK(csv.find("# format_version: 1") != std::string::npos);
  CHECK(csv.find("strobl_h0/gaussian") != std::string::npos);
  const std::string json_text = slurp(prefix + ".json");
  CHECK(json_text.find("type1_error") != std::string::npos);

  // missing required key
  {
    std::ofstream out(config_path);
    out << "trials = 2\n";
  }
  CHECK(run_cli("bench --config " + config_path) == 2);

  std::remove(config_path.c_str());
  std::remove((prefix + ".csv").c_str());
  std::remove((prefix + ".json").c_str());
}

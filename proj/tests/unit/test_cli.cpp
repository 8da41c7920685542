#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

using namespace xfl;
using namespace xfl::cli;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text, const std::string& experiment) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg", experiment);
}

int config_error_line(const std::string& text, const std::string& experiment) {
  try {
    validate(parse(text, experiment));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(XFL_CLI_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndLists) {
  const auto c = parse(
      "# pair on a small box\n"
      "grid.n = 32\n"
      "grid.h = 0.5   # spacing\n"
      "charge.0.value = -1\n"
      "charge.1.value = 2\n"
      "coulomb.separations = 8, 10\n",
      "coulomb-check");
  validate(c);
  EXPECT_EQ(c.grid.dims, (Index3{32, 32, 32}));
  EXPECT_EQ(c.grid.h, 0.5);
  ASSERT_EQ(c.charges.size(), 2u);
  EXPECT_EQ(c.charges[0].value, -1.0);
  EXPECT_EQ(c.separations, (std::vector<double>{8, 10}));
  EXPECT_EQ(c.echo.size(), 5u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(config_error_line("grid.n = 32\ngrid.bogus = 1\n", "coulomb-check"), 2);
  EXPECT_EQ(config_error_line("grid.h = 1\n\ngrid.h = 2\n", "coulomb-check"), 3);
  EXPECT_EQ(config_error_line("grid.h\n", "coulomb-check"), 1);
  EXPECT_EQ(config_error_line("grid.h =\n", "coulomb-check"), 1);
  EXPECT_EQ(config_error_line("dispersion.k = 0.1\n", "coulomb-check"), 1);
  EXPECT_GT(config_error_line("grid.n = 32\ngrid.dims = 32,32,32\n", "coulomb-check"), 0);
  EXPECT_EQ(config_error_line("charge.0.value = 1\ncharge.2.value = 1\n", "selfenergy-scan"), 2);
  // module preconditions without a line
  EXPECT_EQ(config_error_line("charge.2.value = 1\ncharge.1.value = 1\ncharge.0.value = 1\n", "coulomb-check"), 0);
  EXPECT_THROW(default_config("no-such-thing"), ConfigError);
}

TEST(Config, DecomposeCrossChecks) {
  EXPECT_NO_THROW(validate(parse("decompose.signal = cosine\ndecompose.cycles = 4\n", "decompose")));
  EXPECT_THROW(validate(parse("decompose.signal = random\ndecompose.cycles = 4\n", "decompose")), ConfigError);
  EXPECT_THROW(validate(parse("decompose.cycles = 2.5\n", "decompose")), ConfigError);
  EXPECT_THROW(validate(parse("decompose.cycles = 16\n", "decompose")), ConfigError);
  EXPECT_THROW(validate(parse("decompose.signal = cosine\ndynamics.mass = 1\n", "decompose")), ConfigError);
  EXPECT_THROW(validate(parse("decompose.snapshots = 4\n", "decompose")), ConfigError);
}

TEST(Defaults, EveryExperimentValidates) {
  for (const char* name : kExperiments) EXPECT_NO_THROW(validate(default_config(name))) << name;
}

TEST(Report, ChecksAndFormats) {
  RunReport r;
  r.experiment = "x";
  r.columns = {"a", "b"};
  r.add_row({0.1, 1.0 / 3.0});
  EXPECT_TRUE(r.check_at_most("ok", 1e-3, 1e-2).pass);
  EXPECT_TRUE(r.all_pass());
  EXPECT_FALSE(r.check_at_most("nan", std::nan(""), 1.0).pass);
  EXPECT_FALSE(r.all_pass());
  std::ostringstream csv;
  r.write_csv(csv);
  EXPECT_EQ(csv.str(), "a,b\n0.10000000000000001,0.33333333333333331\n");
  EXPECT_EQ(std::stod(format_real(0.1)), 0.1);
  EXPECT_THROW(r.add_row({1.0}), std::exception);
}

TEST(Experiments, SelfEnergyWithOneSpacingHasNoSpreadCheck) {
  auto c = parse("selfenergy.h_list = 1\nselfenergy.extent = 16\n", "selfenergy-scan");
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 1u);
  for (const auto& ch : r.checks) EXPECT_NE(ch.name, "hC_spread");
  EXPECT_TRUE(r.all_pass());
}

TEST(Experiments, OppositeChargesAttract) {
  auto c = parse("grid.n = 32\ncharge.0.value = 1\ncharge.1.value = -1\ncoulomb.separations = 8\n", "coulomb-check");
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_LT(r.rows[0][3], 0.0);
  EXPECT_LT(r.rows[0][4], 0.0);
  EXPECT_LE(r.rows[0][5], 0.03);
}

TEST(Experiments, JsonSchema) {
  const auto r = run_experiment(default_config("dispersion"));
  const auto j = r.to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"experiment", "config", "columns", "rows", "checks", "metrics", "wall_ms"}));
  EXPECT_EQ(j["experiment"], "dispersion");
  ASSERT_EQ(j["rows"].size(), 4u);
  EXPECT_TRUE(j["rows"][0].contains("omega_measured"));
  for (const auto& ch : j["checks"]) {
    EXPECT_TRUE(ch.contains("name"));
    EXPECT_TRUE(ch.contains("value"));
    EXPECT_TRUE(ch.contains("tolerance"));
    EXPECT_TRUE(ch["pass"].get<bool>());
  }
}

TEST(Cli, ExitCodesAndDeterminism) {
  TempDir dir("xfl_cli_test");
  const auto a = dir.path / "a";
  const auto b = dir.path / "b";
  EXPECT_EQ(run_cli("dispersion --out " + a.string()), 0);
  EXPECT_EQ(run_cli("dispersion --out " + b.string()), 0);
  const auto csv = slurp(a / "dispersion.csv");
  EXPECT_FALSE(csv.empty());
  EXPECT_EQ(csv, slurp(b / "dispersion.csv"));

  const auto cfg = dir.path / "bad.cfg";
  std::ofstream(cfg) << "charge.0.value = 1\n";
  EXPECT_EQ(run_cli("coulomb-check --config " + cfg.string() + " --out " + a.string()), 1);
  EXPECT_EQ(run_cli("no-such-experiment"), 1);

  // a random history has temporal-mean content, which the equal split of the
  // zero bin keeps from being idempotent
  const auto rnd = dir.path / "random.cfg";
  std::ofstream(rnd) << "decompose.signal = random\n";
  EXPECT_EQ(run_cli("decompose --config " + rnd.string() + " --out " + a.string()), 2);
  const auto j = nlohmann::json::parse(slurp(a / "decompose.json"));
  bool idempotence_failed = false;
  for (const auto& ch : j["checks"]) {
    if (ch["name"] == "idempotence") idempotence_failed = !ch["pass"].get<bool>();
    if (ch["name"] == "round_trip") EXPECT_TRUE(ch["pass"].get<bool>());
  }
  EXPECT_TRUE(idempotence_failed);

  EXPECT_EQ(run_cli("spinor-demo --seed 7 --out " + a.string()), 0);
  const auto first = slurp(a / "spinor-demo.csv");
  EXPECT_EQ(run_cli("spinor-demo --seed 7 --out " + a.string()), 0);
  EXPECT_EQ(first, slurp(a / "spinor-demo.csv"));
}

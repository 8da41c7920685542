#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace xfl::cli {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Result of one experiment run. Everything except wall_ms is a pure
/// function of the config and seed.
struct RunReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<Check> checks;
  /// Named scalars without a pass/fail verdict.
  std::vector<std::pair<std::string, double>> metrics;
  double wall_ms = 0.0;

  void add_row(std::vector<double> row);
  /// Records value <= tolerance (NaN fails).
  const Check& check_at_most(std::string name, double value, double tolerance);
  bool all_pass() const;

  void write_csv(std::ostream& out) const;
  nlohmann::ordered_json to_json() const;
  /// Human-readable check summary, one line per check.
  void write_summary(std::ostream& out) const;

  /// Writes <dir>/<experiment>.csv and <dir>/<experiment>.json.
  void save(const std::filesystem::path& dir) const;
};

/// %.17g formatting used for every float in the CSV output.
std::string format_real(double v);

}  // namespace xfl::cli

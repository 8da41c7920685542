#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xfl/charge.hpp"
#include "xfl/error.hpp"

namespace xfl::cli {

/// Config problem; `line` is 0 when not tied to a line of the file.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

inline constexpr const char* kExperiments[] = {"coulomb-check",  "energy-scan",      "selfenergy-scan",
                                               "dispersion",     "decompose",        "lagrangian-audit",
                                               "spinor-demo"};

bool is_experiment(const std::string& name);

struct GridConfig {
  Index3 dims{96, 96, 96};
  double h = 1.0;
  Boundary boundary = Boundary::free_space;
  Vec3 origin{};

  Grid3 grid() const { return Grid3(dims, h, origin, boundary); }
};

struct DynamicsConfig {
  double dt_factor = 0.5;
  std::size_t steps = 0;
  std::size_t stride = 1;
  double mass = 0.0;
};

/// Parsed and validated experiment configuration.
///
/// File format: one `key = value` per line, `#` starts a comment, keys are
/// dotted (grid.h, charge.0.position). Lists are comma separated. Keys that
/// the experiment does not use are rejected, as are duplicates.
struct ScenarioConfig {
  std::string experiment;
  std::uint64_t seed = 42;
  GridConfig grid;
  double epsilon0 = 1.0;
  std::vector<ChargeSpec> charges;
  DynamicsConfig dynamics;

  // coulomb-check, energy-scan
  std::vector<double> separations{8, 10, 12, 16};  // in units of h
  // selfenergy-scan
  std::vector<double> h_list{4, 2, 1};
  double extent = 48.0;
  // dispersion
  std::vector<double> k_list{0.0, 0.5, 0.3, 0.4};
  std::vector<double> m_list{0.5, 0.0, 0.4, 0.3};
  std::size_t dispersion_nx = 48;
  double dispersion_h0 = 0.25;
  double periods = 6.0;
  // decompose
  std::string signal = "cosine";
  std::size_t snapshots = 32;
  double cycles = 3.0;
  double sample_dt = 0.25;
  std::string input;
  // lagrangian-audit, spinor-demo
  std::size_t histories = 20;

  /// Key/value pairs in file order (defaults are not echoed).
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Defaults for an experiment when no config file is given.
ScenarioConfig default_config(const std::string& experiment);

/// Parses `in` on top of the experiment defaults. `source` names the input in
/// error messages.
ScenarioConfig parse_config(std::istream& in, const std::string& source, const std::string& experiment);
ScenarioConfig load_config(const std::filesystem::path& path, const std::string& experiment);

/// Module preconditions checked before any compute. Throws ConfigError.
void validate(const ScenarioConfig& config);

}  // namespace xfl::cli

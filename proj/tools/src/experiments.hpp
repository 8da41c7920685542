#pragma once

#include <filesystem>

#include "config.hpp"
#include "report.hpp"

namespace xfl::cli {

RunReport cmd_coulomb_check(const ScenarioConfig& config);
RunReport cmd_energy_scan(const ScenarioConfig& config);
RunReport cmd_selfenergy_scan(const ScenarioConfig& config);
RunReport cmd_dispersion(const ScenarioConfig& config);
/// Also writes the split history files under `out_dir` when it is non-empty.
RunReport cmd_decompose(const ScenarioConfig& config, const std::filesystem::path& out_dir = {});
RunReport cmd_lagrangian_audit(const ScenarioConfig& config);
RunReport cmd_spinor_demo(const ScenarioConfig& config);

/// Dispatches on config.experiment and fills in the config echo and wall time.
RunReport run_experiment(const ScenarioConfig& config, const std::filesystem::path& out_dir = {});

}  // namespace xfl::cli

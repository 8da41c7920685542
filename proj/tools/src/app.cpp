#include "app.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <omp.h>

#include "config.hpp"
#include "experiments.hpp"

namespace xfl::cli {

int run(int argc, char** argv) {
  CLI::App app{"xfieldlab: lattice field experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--config", config_path, "key = value scenario file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "directory for <experiment>.csv and .json")->capture_default_str();
  app.add_option("--seed", seed, "overrides the seed in the config");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

  for (const char* name : kExperiments) app.add_subcommand(name, std::string("run ") + name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    auto config = config_path.empty() ? default_config(experiment) : load_config(config_path, experiment);
    if (seed) config.seed = *seed;
    validate(config);
    if (threads > 0) omp_set_num_threads(threads);
    const auto report = run_experiment(config, out_dir);
    report.save(out_dir);
    report.write_summary(std::cout);
    return report.all_pass() ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace xfl::cli

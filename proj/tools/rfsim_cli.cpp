// rfsim: command-line runner for the resonate-and-fire neuron experiments.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rfsim/commands.hpp"
#include "rfsim/config.hpp"
#include "rfsim/errors.hpp"

int main(int argc, char** argv) {
  using namespace rfsim;
  CLI::App app{"Behavioral simulator of an asynchronous resonate-and-fire neuron"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  app.add_option("-c,--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Monte-Carlo seed override");
  app.add_option("--dt", dt, "Integrator step override, seconds");

  // Common flags are accepted before or after the subcommand.
  for (const std::string& name : cli::subcommands()) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kConfigError;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return cli::kIoError;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed) cfg.montecarlo.model.seed = *seed;
  if (dt) cfg.integrator.dt = *dt;

  const std::string sub = app.get_subcommands().front()->get_name();
  return cli::run(sub, cfg, cfg.output_dir, std::cout);
}

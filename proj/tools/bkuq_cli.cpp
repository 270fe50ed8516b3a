#include "bkuq/common.hpp"
#include "bkuq/config.hpp"
#include "bkuq/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace bkuq;

namespace {

std::vector<int> parse_orders(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("--orders expects a comma-separated list of integers");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--orders expects at least one order");
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertain linearized Boltzmann: spectra, decay rates and gPC studies"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, init, orders;
  int threads = -1;
  bool no_plots = false;
  app.add_option("--config", config_path, "Configuration file (JSON key-value tree)");
  app.add_option("--out", out_dir, "Output directory (overrides experiment.output)");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--no-plots", no_plots, "Write CSV files only");
  app.add_option("--init", init, "Initial data for decay runs: macro | micro");
  app.add_option("--orders", orders, "Comma-separated z-derivative orders for decay runs");

  std::vector<CLI::App*> scenario_cmds;
  for (const auto& name : kScenarioNames)
    scenario_cmds.push_back(app.add_subcommand(name, "Run the " + name + " scenario"));
  CLI::App* cache = app.add_subcommand("cache", "Kernel-matrix cache maintenance");
  cache->require_subcommand(1);
  cache->fallthrough();
  CLI::App* cache_build = cache->add_subcommand("build", "Assemble and store the kernels of the configured model");
  CLI::App* cache_verify = cache->add_subcommand("verify", "Recompute random rows and compare with the stored kernels");
  CLI::App* cache_purge = cache->add_subcommand("purge", "Remove cache entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  std::ostringstream cmd;
  for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];

  ScenarioConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.experiment.output = out_dir;
    if (threads >= 0) cfg.threads = static_cast<unsigned>(threads);
    if (!init.empty()) cfg.experiment.decay.init = init;
    if (!orders.empty()) cfg.experiment.decay.orders = parse_orders(orders);
    for (std::size_t i = 0; i < scenario_cmds.size(); ++i)
      if (scenario_cmds[i]->parsed()) cfg.experiment.scenario = kScenarioNames[i];
    validate_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  }

  if (cache->parsed()) {
    const std::string action = cache_build->parsed() ? "build" : cache_verify->parsed() ? "verify" : "purge";
    (void)cache_purge;
    return cache_ops(action, cfg, std::cerr);
  }
  RunOptions opt;
  opt.plots = !no_plots;
  opt.command_line = cmd.str();
  return run_scenario(cfg, opt, std::cerr);
}

#pragma once

#include "bkuq/config.hpp"

#include <ostream>
#include <string>

namespace bkuq {

enum ExitStatus : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

struct RunOptions {
  bool plots = true;
  std::string command_line; // echoed into the manifest
};

// Runs c.experiment.scenario, writing CSVs, the plot script and manifest.json
// into c.experiment.output. Failed runs leave no files behind.
int run_scenario(const ScenarioConfig& c, const RunOptions& opt, std::ostream& log);

// action: build | verify | purge
int cache_ops(const std::string& action, const ScenarioConfig& c, std::ostream& log);

// Rows compared by cache verify.
inline constexpr int kVerifyRows = 8;
inline constexpr double kVerifyTol = 1e-12;

} // namespace bkuq

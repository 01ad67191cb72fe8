#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fzeno/config.hpp"

namespace fzeno {

// FZENO_THREADS if set and positive, else the hardware concurrency
int thread_count();

// runs body(i) for i in [0, n) on up to thread_count() threads; rethrows the first failure
void parallel_for(int n, const std::function<void(int)>& body);

// grid values multiplied by `unit` (seconds per grid unit)
std::vector<double> make_grid(const GridSpec& g, double unit);

struct RunSummary {
  std::string directory;
  std::vector<std::string> files;
};

// Executes the scenario and writes config.resolved.json, CSV curves and report.json into
// the output directory (the override wins when non-empty). Throws fzeno::Error.
RunSummary run_scenario(const ScenarioConfig& config, const std::string& directory_override = "");

}  // namespace fzeno

// runner.hpp — experiment driver: convergence gating, sweeps, CSV emission

#pragma once

#include <filesystem>
#include <vector>

#include "dicke/config.hpp"

namespace dicke {

struct RunReport {
    int converged_count = 0;  // min over the couplings the experiment touches
    IndexRange window;        // resolved state window (if the kind uses one)
    std::vector<std::filesystem::path> outputs;
};

// Executes one experiment, writing CSV data plus manifest.txt into
// config.out_dir.  Outputs are byte-identical across runs with the same
// config and code version (the manifest, which carries timings, is the one
// exception).  Throws ConfigError / NumericalError / ConvergenceError.
RunReport run(const ExperimentConfig& config);

// run() wrapped in the CLI exit-code contract:
// 0 ok, 2 invalid config, 3 numerical failure, 4 unconverged window.
int run_cli(const ExperimentConfig& config);

} // namespace dicke

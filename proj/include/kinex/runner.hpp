#pragma once

#include <string>

#include "kinex/config.hpp"

namespace kinex {

struct RunResult {
    bool pass = false;
    std::string summary_path;
    std::string results_path;
    std::string histogram_path; // empty when the experiment emits none
};

// Executes the experiment and writes results.csv, summary.json and (for
// sampling experiments) histogram.csv under cfg.out. All artifacts are
// byte-identical for identical (config, seed), independent of the thread
// count. Returns the artifact paths and the overall pass flag.
RunResult run_experiment(const ExperimentConfig& cfg);

// Catalogue text for the `list` subcommand.
std::string list_experiments_text();

// Report text for the `validate` subcommand: "ok" plus the resolved
// configuration.
std::string validate_report(const ExperimentConfig& cfg);

} // namespace kinex

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shotlab/shotnoise.hpp"

namespace shotlab {

// A fully validated experiment: scenario, checker configurations, tolerance
// policy and output location. `echo` is the effective config document (with
// any command-line overrides folded in) and is written to the run manifest;
// feeding it back reproduces the run exactly.
struct ExperimentConfig {
    Seed seed{};
    unsigned threads = 1;
    std::filesystem::path out_dir = "out";
    Scenario scenario;
    double quad_tol = 1e-8;
    double z_threshold = 4.0;
    double ks_alpha = 0.01;
    std::vector<nlohmann::json> checks;
    nlohmann::json echo;
    std::string preset_name; // empty when loaded from a file
};

// Parses and validates a config document. Numeric fields accept either JSON
// numbers or decimal strings. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);

std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);

struct RunResult {
    int exit_code = 0; // 0 all checks pass, 1 check failure
    std::vector<std::filesystem::path> files;
};

// Runs the experiment: Monte-Carlo ensemble, limit covariance, empirical
// comparison, all configured checks; then writes ensemble.csv,
// limit_covariance.csv, comparison.csv, checks.json and manifest.json into
// the output directory. All file writes happen after computation completes.
RunResult run_experiment(const ExperimentConfig& config);

} // namespace shotlab

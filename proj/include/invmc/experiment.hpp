#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invmc/policy.hpp"

namespace invmc {

/// One solver (or myopic) run inside an experiment.
struct RunSpec {
    std::string id;
    Algorithm algorithm = Algorithm::RegressLater;
    Mode mode = Mode::ValueIteration;
    int m_paths = 1000;
    /// Grid levels for GridDiscretisation; 0 keeps the benchmark default.
    int grid_levels = 0;
    std::uint64_t seed = 1;
    bool backward_paths = false;
    int cr_sweeps = 1;
    /// Benchmark overrides merged over the experiment-level ones (JSON object text).
    std::string overrides = "{}";
    /// Run id whose eval_mean is subtracted to fill the uplift column.
    std::string baseline;
    /// Evaluation paths written to trajectory_<id>.csv (0 = none).
    int trajectory_paths = 0;
};

struct ExperimentConfig {
    std::string benchmark;
    std::string overrides = "{}";
    int eval_paths = 1000;
    std::uint64_t eval_seed = 20240601;
    std::vector<RunSpec> runs;
    /// Output directory; the --out flag takes precedence.
    std::string output;
    /// Canonical echo of the parsed configuration.
    std::string echo;
};

/// Parses and validates a configuration (JSON). Unknown keys raise ConfigError.
ExperimentConfig parse_experiment_config(const std::string& text);

struct RunRow {
    std::string run_id;
    std::string algorithm;
    std::string mode;
    int m_paths = 0;
    int k_or_l = 0;
    std::uint64_t seed = 0;
    double solve_wall_ms = 0.0;
    double eval_mean = 0.0;
    double eval_se = 0.0;
    double broken_path_frac = 0.0;
    bool has_uplift = false;
    double uplift = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    int constraint_violations = 0;
};

struct ExperimentOptions {
    /// Also write training and evaluation paths as CSV.
    bool dump_paths = false;
};

/// Runs every configured run sequentially and writes results.csv, report.json
/// and trajectory files into `out_dir`. Returns the rows written.
std::vector<RunRow> run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                   const ExperimentOptions& options = {});

/// CLI wrapper: 0 on success, 2 on configuration errors, 3 on runtime errors.
/// On failure error.json is written into `out_dir` when possible.
int run_experiment_file(const std::string& config_path, const std::string& out_dir,
                        const ExperimentOptions& options = {});

/// results.csv text for the given rows.
std::string results_csv(const std::vector<RunRow>& rows);

std::string library_version();

}  // namespace invmc

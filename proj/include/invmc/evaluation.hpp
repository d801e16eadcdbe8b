#pragma once

#include <string>
#include <vector>

#include "invmc/model.hpp"
#include "invmc/policy.hpp"
#include "invmc/processes.hpp"

namespace invmc {

struct EvaluationOptions {
    /// Keep per-path inventory, control and reward trajectories.
    bool record_trajectories = false;
};

struct EvaluationReport {
    double mean_value = 0.0;
    /// Sample standard deviation / sqrt(M').
    double std_error = 0.0;
    std::vector<double> per_path_values;
    /// mean_inventory[n][d], n = 0..N.
    std::vector<std::vector<double>> mean_inventory;
    /// mean_control[n][d], n = 0..N-1.
    std::vector<std::vector<double>> mean_control;
    /// Decisions violating control, inventory or domain constraints (expected 0).
    int constraint_violations = 0;
    double wall_ms = 0.0;

    // Filled when EvaluationOptions::record_trajectories is set.
    int inv_dim = 0;
    int control_dim = 0;
    /// M' x (N + 1) x q, path-major.
    std::vector<double> inventory_paths;
    /// M' x N x r, path-major.
    std::vector<double> control_paths;
    /// M' x N running rewards.
    std::vector<double> reward_paths;
};

/// Runs the policy forward along every evaluation path from (x0, i0).
/// The first state of each path is replaced by x0. Throws ProblemMismatch when
/// the policy was fitted on a different problem.
EvaluationReport evaluate_policy(const Policy& policy, const ControlProblem& problem, const PathSet& eval_paths, Vec x0,
                                 Vec i0, const EvaluationOptions& options = {});

/// evaluate_policy with zero continuation.
EvaluationReport myopic_policy_value(const ControlProblem& problem, const PathSet& eval_paths, Vec x0, Vec i0,
                                     const ArgmaxOptions& argmax = {}, const EvaluationOptions& options = {});

/// Summary fields as JSON text; per-path values included when requested.
std::string report_to_json(const EvaluationReport& report, bool include_per_path = false);

/// Exact optimal values on a finite chain x inventory-node grid.
struct DpTable {
    int horizon = 0;
    int states = 0;
    int nodes = 0;
    /// value(n, s, k) at index (n * states + s) * nodes + k, n = 0..N.
    std::vector<double> values;
    /// Index into the problem's finite control list of an optimal control, n < N.
    std::vector<int> best_control;
    double value(int n, int s, int k) const {
        return values[(static_cast<std::size_t>(n) * states + s) * nodes + k];
    }
};

/// Backward induction over chain states x inventory nodes for a problem with a
/// finite control set, reward f, terminal g and transition phi. The chain state
/// is the sole exogenous coordinate. Throws ClosureViolation when an admissible
/// control moves a node off the node set.
DpTable exact_dp_oracle(const FiniteChain& chain, const std::vector<std::vector<double>>& inventory_nodes,
                        const ControlProblem& problem);

}  // namespace invmc

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "invmc/basis.hpp"
#include "invmc/model.hpp"
#include "invmc/policy.hpp"
#include "invmc/processes.hpp"
#include "invmc/regression.hpp"

namespace invmc {

enum class InventorySampling { UniformIid, Custom };

/// Training inventory for path m at step n (written into `inventory`).
using InventoryDesign = std::function<void(int n, int m, MutVec inventory)>;
/// Training control for path m at step n given (x, i); must be admissible.
using ControlDesign = std::function<void(int n, int m, Vec x, Vec i, MutVec control)>;

struct BackwardStepOptions {
    int scan_points = 64;
    int max_iterations = 200;
    /// Residual tolerance relative to I_max.
    double tolerance = 1e-9;
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::RegressLater;
    Mode mode = Mode::ValueIteration;
    /// Backward inventory construction (RegressLater + PerformanceIteration, q = 1).
    bool rl_backward_paths = false;
    int m_paths = 1000;
    /// Levels per inventory dimension (GridDiscretisation).
    int grid_levels = 0;
    /// Basis used by the solver; its kind must match the algorithm.
    BasisSpec basis;
    /// Exogenous process; required by RegressLater for conditional expectations.
    ProcessSpec process;
    /// Inventory training points: RegressLater uses Y_n^m directly, ControlRandomisation
    /// uses them in place of forward-simulated trajectories.
    InventorySampling inventory_sampling = InventorySampling::UniformIid;
    InventoryDesign custom_inventory;
    /// ControlRandomisation only; default draws uniformly from the admissible set.
    ControlDesign custom_control;
    int cr_sweeps = 1;
    std::uint64_t seed = 1;
    ArgmaxOptions argmax;
    RegressionOptions regression;
    BackwardStepOptions backward;
};

/// Checks option combinations against the problem; throws std::invalid_argument.
void validate(const SolverConfig& config, const ControlProblem& problem, const PathSet& paths);

struct SolveResult {
    Policy policy;
    /// Fraction of paths without an antecedent per step (backward paths only, else 0).
    std::vector<double> broken_fraction;
    double mean_broken_fraction = 0.0;
    /// Fraction of paths broken at least once during the backward sweep.
    double ever_broken_fraction = 0.0;
    double solve_wall_ms = 0.0;
};

SolveResult solve_grid_discretisation(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config);
SolveResult solve_control_randomisation(const ControlProblem& problem, const PathSet& paths,
                                        const SolverConfig& config);
SolveResult solve_regress_later(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config);
/// Dispatches on config.algorithm.
SolveResult solve(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config);

struct BackwardResult {
    bool found = false;
    double antecedent = 0.0;
    double residual = 0.0;
};

/// Inventory y with phi(n, z, u*(y), y) = y_next, by bisection on the first
/// bracketing sign change of psi(y) = y_next - phi(n, z, u*(y), y) found on a
/// uniform pre-scan of [0, I_max]. `found` is false when no bracket yields a
/// residual within tolerance * I_max. Requires inv_dim == 1.
BackwardResult backward_inventory_step(const ControlProblem& problem, int n, Vec z, double y_next,
                                       const std::function<std::vector<double>(double y)>& control_map,
                                       const BackwardStepOptions& options = {});

/// Realised payoff of following `policy` from (n, paths(m, n), i) to the horizon.
double rollout(const ControlProblem& problem, const Policy& policy, const PathSet& paths, int m, int n, Vec i);

}  // namespace invmc

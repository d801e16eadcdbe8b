#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invmc/argmax.hpp"
#include "invmc/basis.hpp"
#include "invmc/model.hpp"
#include "invmc/processes.hpp"
#include "invmc/regression.hpp"

namespace invmc {

enum class Algorithm { GridDiscretisation, ControlRandomisation, RegressLater, Myopic };
enum class Mode { ValueIteration, PerformanceIteration };

std::string to_string(Algorithm a);
std::string to_string(Mode m);
Algorithm algorithm_from_string(const std::string& text);
Mode mode_from_string(const std::string& text);

/// Uniform inventory levels lambda_1 = 0 < ... < lambda_L = I_max for each dimension.
std::vector<std::vector<double>> uniform_levels(const std::vector<double>& inv_max, int levels_per_dim);

/// Multilinear interpolation of `values` (flat, dimension 0 fastest) on the
/// tensor grid `levels`, clamped to the grid.
double multilinear_interpolate(const std::vector<std::vector<double>>& levels, const double* values, Vec point);

/// multilinear_interpolate with the grid analysed once; evenly spaced levels
/// are located without a search. Keeps a reference to `levels`.
class GridInterpolator {
public:
    explicit GridInterpolator(const std::vector<std::vector<double>>& levels);
    double operator()(const double* values, Vec point) const;

private:
    void locate(int d, double v, int& cell, double& weight) const;

    const std::vector<std::vector<double>>* levels_;
    int q_ = 0;
    std::array<const double*, kMaxDim> data_{};
    std::array<double, kMaxDim> lo_{};
    std::array<double, kMaxDim> inv_step_{};
    std::array<int, kMaxDim> last_{};
    std::array<std::size_t, kMaxDim> stride_{};
    std::array<bool, kMaxDim> even_{};
};

/// A fitted control rule u(n, x, i).
///
/// RegressLater: row n of `coefficients` fits the value (or realised payoff) at
///   step n + 1 on basis(X_{n+1}, I_{n+1}); decisions use its analytic
///   conditional expectation given X_n = x.
/// ControlRandomisation: row n fits the continuation at step n on
///   basis(X_n, I_n, u).
/// GridDiscretisation: level_coefficients[n] is K x L, column l fits the
///   continuation at inventory level l on basis(X_n); decisions interpolate
///   between levels.
/// Myopic: zero continuation.
struct Policy {
    Algorithm algorithm = Algorithm::Myopic;
    Mode mode = Mode::ValueIteration;
    int horizon = 0;
    std::uint64_t fingerprint = 0;
    std::string problem_name;
    BasisSpec basis;
    ProcessSpec process;
    Eigen::MatrixXd coefficients;
    std::vector<std::vector<double>> levels;
    std::vector<Eigen::MatrixXd> level_coefficients;
    ArgmaxOptions argmax;
    /// Regression diagnostics per fitted step (GD: worst over levels).
    std::vector<RegressionDiagnostics> diagnostics;

    /// Control maximising f + estimated continuation at (n, x, i).
    ArgmaxResult decide(const ControlProblem& problem, int n, Vec x, Vec i) const;

    /// Decision rule at fixed (n, x), reusable across inventories.
    class StepRule {
    public:
        ArgmaxResult decide(const ControlProblem& problem, Vec i) const;

    private:
        friend struct Policy;
        const Policy* policy_ = nullptr;
        int n_ = 0;
        std::vector<double> x_;
        InventoryFunction continuation_;
        Eigen::VectorXd at_levels_;
        std::optional<GridInterpolator> grid_;
    };
    StepRule at(int n, Vec x) const;
};

Policy myopic_policy(const ControlProblem& problem, const ArgmaxOptions& argmax = {});

/// Versioned JSON text; coefficients row-major with 17 significant digits.
std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text);
void save_policy(const Policy& policy, const std::string& file);
Policy load_policy(const std::string& file);

}  // namespace invmc

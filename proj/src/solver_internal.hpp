#pragma once

#include <chrono>

#include "invmc/rng.hpp"
#include "invmc/solvers.hpp"

namespace invmc::detail {

/// Y ~ Uniform([0, I_max]) drawn from (seed, m) at counter step n.
void uniform_inventory(const ControlProblem& problem, std::uint64_t seed, int m, int n, DrawPurpose purpose,
                       MutVec out);

/// Control drawn uniformly from the admissible set (finite sets) or uniformly
/// in nested normalised coordinates (box spaces).
void uniform_admissible_control(const ControlProblem& problem, int n, Vec x, Vec i, const PathStream& stream,
                                DrawPurpose purpose, MutVec out);

/// Design matrix rows eval_basis(spec, x_m, i_m[, u_m]).
Eigen::MatrixXd design_matrix(const BasisSpec& spec, const PathSet& paths, int n, const std::vector<double>& inventory,
                              int inv_dim, const std::vector<double>* controls = nullptr, int control_dim = 0);

/// Copy of `spec` with automatic scaling applied when requested.
BasisSpec prepared_basis(const BasisSpec& spec, const ControlProblem& problem, const PathSet& paths);

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace invmc::detail

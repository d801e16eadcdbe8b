#include <algorithm>

#include "invmc/parallel.hpp"
#include "solver_internal.hpp"

namespace invmc {

namespace {

// Inventory vector of flat level index l (dimension 0 fastest).
void level_point(const std::vector<std::vector<double>>& levels, std::size_t l, double* out) {
    for (std::size_t d = 0; d < levels.size(); ++d) {
        out[d] = levels[d][l % levels[d].size()];
        l /= levels[d].size();
    }
}

}  // namespace

SolveResult solve_grid_discretisation(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config) {
    validate(config, problem, paths);
    const detail::Stopwatch clock;
    const int n_steps = problem.horizon();
    const int m_paths = paths.paths();
    const auto q = static_cast<std::size_t>(problem.inv_dim());

    SolveResult result;
    Policy& policy = result.policy;
    policy.algorithm = Algorithm::GridDiscretisation;
    policy.mode = config.mode;
    policy.horizon = n_steps;
    policy.fingerprint = problem.fingerprint();
    policy.problem_name = problem.name();
    policy.basis = detail::prepared_basis(config.basis, problem, paths);
    policy.process = config.process;
    policy.argmax = config.argmax;
    policy.levels = uniform_levels(problem.inv_max(), config.grid_levels);
    std::size_t n_levels = 1;
    for (const auto& l : policy.levels) n_levels *= l.size();
    const auto lt = static_cast<Eigen::Index>(n_levels);
    policy.level_coefficients.assign(n_steps, Eigen::MatrixXd::Zero(policy.basis.size(), lt));
    policy.diagnostics.resize(n_steps);
    result.broken_fraction.assign(n_steps, 0.0);

    std::vector<double> level_table(n_levels * q);
    for (std::size_t l = 0; l < n_levels; ++l) level_point(policy.levels, l, level_table.data() + l * q);
    auto level_at = [&](std::size_t l) { return Vec(level_table.data() + l * q, q); };

    // responses(m, l): value (or realised payoff) at step n + 1 from level l.
    Eigen::MatrixXd responses(m_paths, lt);
    for (int m = 0; m < m_paths; ++m) {
        for (std::size_t l = 0; l < n_levels; ++l) {
            responses(m, static_cast<Eigen::Index>(l)) = problem.terminal_reward(paths.state(m, n_steps), level_at(l));
        }
    }

    const GridInterpolator grid(policy.levels);
    const std::vector<double> no_inventory;
    const bool performance = config.mode == Mode::PerformanceIteration;
    for (int n = n_steps - 1; n >= 0; --n) {
        const Eigen::MatrixXd design = detail::design_matrix(policy.basis, paths, n, no_inventory, 0);
        const MultiFitResult fit = fit_least_squares(design, responses, config.regression);
        policy.level_coefficients[n] = fit.coefficients;
        policy.diagnostics[n] = fit.diagnostics;
        if (n == 0) break;

        Eigen::MatrixXd next(m_paths, lt);
        parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
            Eigen::VectorXd at_levels(lt);
            for (std::size_t mi = begin; mi < end; ++mi) {
                const int m = static_cast<int>(mi);
                const Vec x = paths.state(m, n);
                if (!performance) {
                    at_levels.noalias() = policy.level_coefficients[n].transpose() * eval_basis(policy.basis, x, {});
                }
                auto cont = [&](Vec, Vec i_next) {
                    return grid(at_levels.data(), i_next);
                };
                for (std::size_t l = 0; l < n_levels; ++l) {
                    const auto li = static_cast<Eigen::Index>(l);
                    if (performance) {
                        next(m, li) = rollout(problem, policy, paths, m, n, level_at(l));
                    } else {
                        next(m, li) = argmax_control(problem, n, x, level_at(l), cont, policy.argmax).value;
                    }
                }
            }
        });
        responses = std::move(next);
    }
    result.solve_wall_ms = clock.elapsed_ms();
    return result;
}

}  // namespace invmc

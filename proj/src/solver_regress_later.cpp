#include <algorithm>
#include <numeric>

#include "invmc/parallel.hpp"
#include "solver_internal.hpp"

namespace invmc {

namespace {

// Y_n^m for every path, from the custom design or uniform draws.
void training_inventory(const ControlProblem& problem, const SolverConfig& config, int n, int m_paths,
                        std::vector<double>& out) {
    const int q = problem.inv_dim();
    out.resize(static_cast<std::size_t>(m_paths) * q);
    for (int m = 0; m < m_paths; ++m) {
        const MutVec y(out.data() + static_cast<std::size_t>(m) * q, static_cast<std::size_t>(q));
        if (config.inventory_sampling == InventorySampling::Custom) {
            config.custom_inventory(n, m, y);
            if (!problem.in_bounds(y)) throw InadmissibleControl("custom training inventory outside bounds");
        } else {
            detail::uniform_inventory(problem, config.seed, m, n, DrawPurpose::InventoryPlacement, y);
        }
    }
}

}  // namespace

SolveResult solve_regress_later(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config) {
    validate(config, problem, paths);
    const detail::Stopwatch clock;
    const int n_steps = problem.horizon();
    const int m_paths = paths.paths();
    const int q = problem.inv_dim();
    const auto qs = static_cast<std::size_t>(q);

    SolveResult result;
    Policy& policy = result.policy;
    policy.algorithm = Algorithm::RegressLater;
    policy.mode = config.mode;
    policy.horizon = n_steps;
    policy.fingerprint = problem.fingerprint();
    policy.problem_name = problem.name();
    policy.basis = detail::prepared_basis(config.basis, problem, paths);
    policy.process = config.process;
    policy.argmax = config.argmax;
    policy.coefficients = Eigen::MatrixXd::Zero(n_steps, policy.basis.size());
    policy.diagnostics.resize(n_steps);
    result.broken_fraction.assign(n_steps, 0.0);

    // Inventory paired with Z_{n+1} and the response observed there.
    std::vector<double> y_next;
    training_inventory(problem, config, n_steps, m_paths, y_next);
    Eigen::VectorXd response(m_paths);
    for (int m = 0; m < m_paths; ++m) {
        response[m] = problem.terminal_reward(paths.state(m, n_steps), Vec(y_next.data() + m * qs, qs));
    }

    const bool performance = config.mode == Mode::PerformanceIteration;
    std::vector<double> y_cur;
    std::vector<char> ever_broken(config.rl_backward_paths ? m_paths : 0, 0);
    for (int n = n_steps - 1; n >= 0; --n) {
        const Eigen::MatrixXd design = detail::design_matrix(policy.basis, paths, n + 1, y_next, q);
        const FitResult fit = fit_least_squares(design, response, config.regression);
        policy.coefficients.row(n) = fit.coefficients.transpose();
        policy.diagnostics[n] = fit.diagnostics;
        if (n == 0) break;

        Eigen::VectorXd next_response(m_paths);
        if (performance && config.rl_backward_paths) {
            y_cur.assign(static_cast<std::size_t>(m_paths), 0.0);
            std::vector<char> broken(m_paths, 0);
            parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
                for (std::size_t mi = begin; mi < end; ++mi) {
                    const int m = static_cast<int>(mi);
                    const Vec z = paths.state(m, n);
                    const Policy::StepRule rule = policy.at(n, z);
                    auto control_map = [&](double y) {
                        const auto r = rule.decide(problem, Vec(&y, 1));
                        return std::vector<double>(r.control().begin(), r.control().end());
                    };
                    const BackwardResult back =
                        backward_inventory_step(problem, n, z, y_next[mi], control_map, config.backward);
                    if (back.found) {
                        y_cur[mi] = back.antecedent;
                        const auto r = rule.decide(problem, Vec(&y_cur[mi], 1));
                        next_response[m] = r.reward + response[m];
                    } else {
                        broken[mi] = 1;
                        detail::uniform_inventory(problem, config.seed, m, n, DrawPurpose::BrokenPathPlacement,
                                                  MutVec(&y_cur[mi], 1));
                        next_response[m] = rollout(problem, policy, paths, m, n, Vec(&y_cur[mi], 1));
                    }
                }
            });
            result.broken_fraction[n] =
                static_cast<double>(std::accumulate(broken.begin(), broken.end(), 0)) / m_paths;
            for (int m = 0; m < m_paths; ++m) ever_broken[m] |= broken[m];
        } else {
            training_inventory(problem, config, n, m_paths, y_cur);
            parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
                for (std::size_t mi = begin; mi < end; ++mi) {
                    const int m = static_cast<int>(mi);
                    const Vec y(y_cur.data() + mi * qs, qs);
                    if (performance) {
                        next_response[m] = rollout(problem, policy, paths, m, n, y);
                    } else {
                        next_response[m] = policy.decide(problem, n, paths.state(m, n), y).value;
                    }
                }
            });
        }
        response = std::move(next_response);
        std::swap(y_next, y_cur);
    }

    if (config.rl_backward_paths && n_steps > 1) {
        double total = 0.0;
        for (int n = 1; n < n_steps; ++n) total += result.broken_fraction[n];
        result.mean_broken_fraction = total / (n_steps - 1);
        result.ever_broken_fraction =
            static_cast<double>(std::accumulate(ever_broken.begin(), ever_broken.end(), 0)) / m_paths;
    }
    result.solve_wall_ms = clock.elapsed_ms();
    return result;
}

}  // namespace invmc

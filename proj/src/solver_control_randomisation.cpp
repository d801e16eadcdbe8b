#include <algorithm>

#include "invmc/parallel.hpp"
#include "solver_internal.hpp"

namespace invmc {

namespace {

struct Trajectories {
    int q = 0;
    int r = 0;
    // inventory[n]: M x q, control[n]: M x r, reached[n]: phi(n, Z_n, U_n, Y_n), M x q.
    std::vector<std::vector<double>> inventory;
    std::vector<std::vector<double>> control;
    std::vector<std::vector<double>> reached;
};

Trajectories training_trajectories(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config,
                                   const Policy* previous, int sweep) {
    const int n_steps = problem.horizon();
    const int m_paths = paths.paths();
    Trajectories t;
    t.q = problem.inv_dim();
    t.r = problem.control_dim();
    const auto q = static_cast<std::size_t>(t.q);
    const auto r = static_cast<std::size_t>(t.r);
    t.inventory.assign(n_steps, std::vector<double>(m_paths * q));
    t.control.assign(n_steps, std::vector<double>(m_paths * r));
    t.reached.assign(n_steps, std::vector<double>(m_paths * q));
    const std::uint64_t seed = config.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(sweep);

    parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
        for (std::size_t mi = begin; mi < end; ++mi) {
            const int m = static_cast<int>(mi);
            const PathStream stream(seed, mi);
            std::array<double, kMaxDim> y{};
            if (config.inventory_sampling == InventorySampling::Custom) {
                config.custom_inventory(0, m, MutVec(y.data(), q));
            } else {
                detail::uniform_inventory(problem, seed, m, 0, DrawPurpose::InventoryPlacement, MutVec(y.data(), q));
            }
            for (int n = 0; n < n_steps; ++n) {
                if (n > 0 && config.inventory_sampling == InventorySampling::Custom) {
                    config.custom_inventory(n, m, MutVec(y.data(), q));
                }
                const Vec x = paths.state(m, n);
                const Vec yv(y.data(), q);
                double* yn = t.inventory[n].data() + mi * q;
                double* un = t.control[n].data() + mi * r;
                std::copy(y.begin(), y.begin() + q, yn);
                if (config.custom_control) {
                    config.custom_control(n, m, x, yv, MutVec(un, r));
                } else {
                    const bool use_policy =
                        previous && stream.uniforms(static_cast<std::uint32_t>(n), DrawPurpose::CrSweepMix, 0)[0] < 0.5;
                    if (use_policy) {
                        const auto d = previous->decide(problem, n, x, yv);
                        std::copy(d.u.begin(), d.u.begin() + r, un);
                    } else {
                        detail::uniform_admissible_control(problem, n, x, yv, stream, DrawPurpose::ControlSampling,
                                                           MutVec(un, r));
                    }
                }
                const auto next = apply_transition(problem, n, x, Vec(un, r), yv);
                std::copy(next.begin(), next.end(), t.reached[n].data() + mi * q);
                std::copy(next.begin(), next.end(), y.begin());
            }
        }
    });
    return t;
}

}  // namespace

SolveResult solve_control_randomisation(const ControlProblem& problem, const PathSet& paths,
                                        const SolverConfig& config) {
    validate(config, problem, paths);
    const detail::Stopwatch clock;
    const int n_steps = problem.horizon();
    const int m_paths = paths.paths();
    const auto q = static_cast<std::size_t>(problem.inv_dim());
    const bool performance = config.mode == Mode::PerformanceIteration;

    SolveResult result;
    result.broken_fraction.assign(n_steps, 0.0);
    const BasisSpec basis = detail::prepared_basis(config.basis, problem, paths);
    Policy previous;
    for (int sweep = 0; sweep < config.cr_sweeps; ++sweep) {
        Policy policy;
        policy.algorithm = Algorithm::ControlRandomisation;
        policy.mode = config.mode;
        policy.horizon = n_steps;
        policy.fingerprint = problem.fingerprint();
        policy.problem_name = problem.name();
        policy.basis = basis;
        policy.process = config.process;
        policy.argmax = config.argmax;
        policy.coefficients = Eigen::MatrixXd::Zero(n_steps, basis.size());
        policy.diagnostics.resize(n_steps);

        const Trajectories t = training_trajectories(problem, paths, config, sweep > 0 ? &previous : nullptr, sweep);
        Eigen::VectorXd response(m_paths);
        for (int m = 0; m < m_paths; ++m) {
            response[m] = problem.terminal_reward(paths.state(m, n_steps),
                                                  Vec(t.reached[n_steps - 1].data() + m * q, q));
        }
        for (int n = n_steps - 1; n >= 0; --n) {
            const Eigen::MatrixXd design =
                detail::design_matrix(basis, paths, n, t.inventory[n], t.q, &t.control[n], t.r);
            const FitResult fit = fit_least_squares(design, response, config.regression);
            policy.coefficients.row(n) = fit.coefficients.transpose();
            policy.diagnostics[n] = fit.diagnostics;
            if (n == 0) break;

            // Responses for step n - 1 are observed at (Z_n, phi(n - 1, Z_{n-1}, U_{n-1}, Y_{n-1})).
            const auto& reached = t.reached[n - 1];
            Eigen::VectorXd next(m_paths);
            parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
                for (std::size_t mi = begin; mi < end; ++mi) {
                    const int m = static_cast<int>(mi);
                    const Vec i(reached.data() + mi * q, q);
                    next[m] = performance ? rollout(problem, policy, paths, m, n, i)
                                          : policy.decide(problem, n, paths.state(m, n), i).value;
                }
            });
            response = std::move(next);
        }
        previous = std::move(policy);
    }
    result.policy = std::move(previous);
    result.solve_wall_ms = clock.elapsed_ms();
    return result;
}

}  // namespace invmc

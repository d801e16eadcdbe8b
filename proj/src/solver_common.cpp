#include <stdexcept>

#include "invmc/error.hpp"
#include "solver_internal.hpp"

namespace invmc {

namespace detail {

void uniform_inventory(const ControlProblem& problem, std::uint64_t seed, int m, int n, DrawPurpose purpose,
                       MutVec out) {
    const PathStream stream(seed, static_cast<std::uint64_t>(m));
    const int q = problem.inv_dim();
    for (int d = 0; d < q; d += 2) {
        const auto u = stream.uniforms(static_cast<std::uint32_t>(n), purpose, static_cast<std::uint32_t>(d / 2));
        out[d] = u[0] * problem.inv_max()[d];
        if (d + 1 < q) out[d + 1] = u[1] * problem.inv_max()[d + 1];
    }
}

void uniform_admissible_control(const ControlProblem& problem, int n, Vec x, Vec i, const PathStream& stream,
                                DrawPurpose purpose, MutVec out) {
    const auto step = static_cast<std::uint32_t>(n);
    if (problem.finite_controls()) {
        const auto set = admissible_controls(problem, n, x, i);
        const auto& members = set.members();
        const double u = stream.uniforms(step, purpose, 0)[0];
        const std::size_t k = std::min(members.size() - 1, static_cast<std::size_t>(u * members.size()));
        std::copy(members[k].begin(), members[k].end(), out.begin());
        return;
    }
    const int q = problem.control_dim();
    std::fill(out.begin(), out.end(), 0.0);
    for (int dim : problem.range_order()) {
        const auto t = stream.uniforms(step, purpose, static_cast<std::uint32_t>(dim + 1))[0];
        const Interval r = problem.control_range(n, x, i, dim, Vec(out.data(), static_cast<std::size_t>(q)));
        if (r.empty()) throw EmptyFeasibleSet("no admissible control at step " + std::to_string(n));
        out[dim] = r.lo + t * (r.hi - r.lo);
    }
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, const PathSet& paths, int n, const std::vector<double>& inventory,
                              int inv_dim, const std::vector<double>* controls, int control_dim) {
    const int m_paths = paths.paths();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a(m_paths, spec.size());
    for (int m = 0; m < m_paths; ++m) {
        const Vec i(inventory.data() + static_cast<std::size_t>(m) * inv_dim, static_cast<std::size_t>(inv_dim));
        const Vec u = controls ? Vec(controls->data() + static_cast<std::size_t>(m) * control_dim,
                                     static_cast<std::size_t>(control_dim))
                               : Vec{};
        eval_basis_into(spec, paths.state(m, n), i, u, a.row(m).data());
    }
    return a;
}

BasisSpec prepared_basis(const BasisSpec& spec, const ControlProblem& problem, const PathSet& paths) {
    BasisSpec out = spec;
    if (spec.auto_scale && spec.kind != BasisKind::HypercubeAffine) {
        out.scaling = auto_scaling(spec, problem, paths);
        out.auto_scale = false;
    }
    validate(out);
    return out;
}

}  // namespace detail

void validate(const SolverConfig& config, const ControlProblem& problem, const PathSet& paths) {
    if (config.m_paths != paths.paths()) {
        throw std::invalid_argument("config.m_paths (" + std::to_string(config.m_paths) +
                                    ") differs from the number of training paths (" + std::to_string(paths.paths()) +
                                    ")");
    }
    if (paths.steps() != problem.horizon()) throw DimensionMismatch("training paths must span the problem horizon");
    if (paths.dim() != problem.exo_dim()) throw DimensionMismatch("training paths have the wrong dimension");
    const auto& b = config.basis;
    validate(b);
    if (b.exo_dim != problem.exo_dim()) throw DimensionMismatch("basis exogenous dimension differs from the problem");
    switch (config.algorithm) {
        case Algorithm::GridDiscretisation:
            if (b.kind != BasisKind::ExoOnly) throw std::invalid_argument("grid discretisation needs an ExoOnly basis");
            if (config.grid_levels < 2) throw std::invalid_argument("grid discretisation needs grid_levels >= 2");
            break;
        case Algorithm::ControlRandomisation:
            if (b.kind != BasisKind::PolyWithControl) {
                throw std::invalid_argument("control randomisation needs a PolyWithControl basis");
            }
            if (b.inv_dim != problem.inv_dim() || b.control_dim != problem.control_dim()) {
                throw DimensionMismatch("basis inventory/control dimensions differ from the problem");
            }
            if (config.cr_sweeps < 1) throw std::invalid_argument("cr_sweeps must be >= 1");
            break;
        case Algorithm::RegressLater:
            if (b.kind != BasisKind::PolyProduct && b.kind != BasisKind::HypercubeAffine) {
                throw std::invalid_argument("regress-later needs a PolyProduct or HypercubeAffine basis");
            }
            if (b.inv_dim != problem.inv_dim()) throw DimensionMismatch("basis inventory dimension differs");
            if (config.process.dim() != problem.exo_dim()) {
                throw DimensionMismatch("regress-later needs the exogenous process spec");
            }
            if (config.rl_backward_paths && config.mode != Mode::PerformanceIteration) {
                throw std::invalid_argument("backward paths apply to performance iteration only");
            }
            if (config.rl_backward_paths && problem.inv_dim() != 1) {
                throw std::invalid_argument("backward paths require a one-dimensional inventory");
            }
            break;
        case Algorithm::Myopic:
            throw std::invalid_argument("the myopic policy has no solver");
    }
    if (config.inventory_sampling == InventorySampling::Custom && !config.custom_inventory) {
        throw std::invalid_argument("custom inventory sampling needs custom_inventory");
    }
    if (config.backward.scan_points < 2 || config.backward.max_iterations < 1) {
        throw std::invalid_argument("backward step needs scan_points >= 2 and max_iterations >= 1");
    }
}

double rollout(const ControlProblem& problem, const Policy& policy, const PathSet& paths, int m, int n, Vec i) {
    std::array<double, kMaxDim> inv{};
    std::copy(i.begin(), i.end(), inv.begin());
    const auto q = static_cast<std::size_t>(problem.inv_dim());
    double total = 0.0;
    for (int k = n; k < problem.horizon(); ++k) {
        const auto r = policy.decide(problem, k, paths.state(m, k), Vec(inv.data(), q));
        total += r.reward;
        std::copy(r.next.begin(), r.next.begin() + q, inv.begin());
    }
    return total + problem.terminal_reward(paths.state(m, problem.horizon()), Vec(inv.data(), q));
}

SolveResult solve(const ControlProblem& problem, const PathSet& paths, const SolverConfig& config) {
    switch (config.algorithm) {
        case Algorithm::GridDiscretisation: return solve_grid_discretisation(problem, paths, config);
        case Algorithm::ControlRandomisation: return solve_control_randomisation(problem, paths, config);
        case Algorithm::RegressLater: return solve_regress_later(problem, paths, config);
        case Algorithm::Myopic: break;
    }
    throw std::invalid_argument("the myopic policy has no solver");
}

}  // namespace invmc

#include "oracle_instance.hpp"

#include <cmath>
#include <functional>

#include "invmc/basis.hpp"

namespace invmc::testing {

namespace {

constexpr int kSteps = 4;
constexpr double kStep = 0.25;

}  // namespace

OracleInstance make_oracle_instance() {
    OracleInstance inst;
    inst.chain.states = {1.0, 2.0, 3.0};
    inst.chain.transition = {0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5};
    inst.process.components = {inst.chain};
    inst.nodes = {{0.0}, {0.25}, {0.5}, {0.75}, {1.0}};

    ProblemDefinition def;
    def.name = "oracle";
    def.descriptor = "three-state chain, five nodes";
    def.horizon = kSteps;
    def.exo_dim = 1;
    def.inv_dim = 1;
    def.inv_max = {1.0};
    def.controls = FiniteControls{{{-1.0}, {0.0}, {1.0}}};
    def.additive = AdditiveTransition{{kStep}, {0.0}};
    def.running_reward = [](int n, Vec x, Vec i, Vec u) {
        return -u[0] * x[0] * kStep - 0.05 * std::abs(u[0]) + 0.01 * n * i[0];
    };
    def.terminal_reward = [](Vec x, Vec i) { return x[0] * i[0] - (i[0] - 0.5) * (i[0] - 0.5); };
    inst.problem = std::make_shared<const ControlProblem>(std::move(def));

    // Enumerate all 3^N continuations of x0 with integer multiplicities (probabilities are k/4).
    std::vector<std::vector<int>> paths;
    std::vector<int> current(kSteps + 1, inst.start_state);
    std::function<void(int, int)> walk = [&](int step, int weight) {
        if (step > kSteps) {
            for (int c = 0; c < weight; ++c) paths.push_back(current);
            return;
        }
        const int prev = current[step - 1];
        for (int s = 0; s < 3; ++s) {
            current[step] = s;
            walk(step + 1, weight * static_cast<int>(std::lround(4.0 * inst.chain.transition[prev * 3 + s])));
        }
    };
    walk(1, 1);
    inst.base_paths = PathSet(static_cast<int>(paths.size()), kSteps, 1, 0);
    for (int m = 0; m < inst.base_paths.paths(); ++m) {
        for (int n = 0; n <= kSteps; ++n) inst.base_paths.state(m, n)[0] = inst.chain.states[paths[m][n]];
    }
    return inst;
}

PathSet replicate_paths(const PathSet& base, int copies) {
    PathSet out(base.paths() * copies, base.steps(), base.dim(), base.seed());
    for (int m = 0; m < out.paths(); ++m) {
        for (int n = 0; n <= base.steps(); ++n) {
            for (int d = 0; d < base.dim(); ++d) out.state(m, n)[d] = base.value(m / copies, n, d);
        }
    }
    return out;
}

std::vector<std::pair<int, int>> admissible_pairs(const OracleInstance& inst) {
    std::vector<std::pair<int, int>> pairs;
    const auto& controls = std::get<FiniteControls>(inst.problem->controls()).values;
    for (int k = 0; k < static_cast<int>(inst.nodes.size()); ++k) {
        for (int c = 0; c < static_cast<int>(controls.size()); ++c) {
            const double next = inst.nodes[k][0] + kStep * controls[c][0];
            if (next >= -1e-12 && next <= 1.0 + 1e-12) pairs.emplace_back(k, c);
        }
    }
    return pairs;
}

PathSet oracle_paths(const OracleInstance& inst, Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::RegressLater: return replicate_paths(inst.base_paths, static_cast<int>(inst.nodes.size()));
        case Algorithm::ControlRandomisation:
            return replicate_paths(inst.base_paths, static_cast<int>(admissible_pairs(inst).size()));
        default: return inst.base_paths;
    }
}

SolverConfig oracle_config(const OracleInstance& inst, Algorithm algorithm, Mode mode) {
    SolverConfig c;
    c.algorithm = algorithm;
    c.mode = mode;
    c.process = inst.process;
    c.seed = 11;
    const PathSet paths = oracle_paths(inst, algorithm);
    c.m_paths = paths.paths();
    const auto nodes = inst.nodes;
    switch (algorithm) {
        case Algorithm::RegressLater: {
            // x^a i^b, a <= 2, b <= 4: spans every function on 3 states x 5 nodes.
            c.basis = poly_product(1, 1, tensor_terms({2, 4}));
            c.inventory_sampling = InventorySampling::Custom;
            const int copies = static_cast<int>(nodes.size());
            c.custom_inventory = [nodes, copies](int, int m, MutVec y) { y[0] = nodes[m % copies][0]; };
            break;
        }
        case Algorithm::ControlRandomisation: {
            // x^a i^b u^c with (b, c) chosen to span functions on the 13 admissible (node, control) pairs.
            std::vector<std::vector<int>> terms;
            const std::vector<std::vector<int>> iu = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {0, 1}, {1, 1},
                                                      {2, 1}, {3, 1}, {0, 2}, {1, 2}, {2, 2}, {3, 2}};
            for (int a = 0; a <= 2; ++a) {
                for (const auto& bc : iu) terms.push_back({a, bc[0], bc[1]});
            }
            c.basis = poly_with_control(1, 1, 1, terms);
            const auto pairs = admissible_pairs(inst);
            const auto controls = std::get<FiniteControls>(inst.problem->controls()).values;
            const int copies = static_cast<int>(pairs.size());
            c.inventory_sampling = InventorySampling::Custom;
            c.custom_inventory = [nodes, pairs, copies](int, int m, MutVec y) { y[0] = nodes[pairs[m % copies].first][0]; };
            c.custom_control = [pairs, controls, copies](int, int m, Vec, Vec, MutVec u) {
                u[0] = controls[pairs[m % copies].second][0];
            };
            break;
        }
        case Algorithm::GridDiscretisation:
            c.basis = exo_only(1, {{0}, {1}, {2}});
            c.grid_levels = static_cast<int>(nodes.size());
            break;
        default: break;
    }
    return c;
}

}  // namespace invmc::testing

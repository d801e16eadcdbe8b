#include "invmc/evaluation.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "invmc/error.hpp"
#include "invmc/parallel.hpp"
#include "solver_internal.hpp"

namespace invmc {

namespace {

bool decision_ok(const ControlProblem& problem, int n, Vec x, Vec i, Vec u, Vec next) {
    if (!problem.in_bounds(i, 1e3) || !problem.in_bounds(next, 1e3)) return false;
    const AdmissibleControlSet set(problem, n, x, i);
    if (!set.contains(u, 1e-9)) return false;
    return problem.constraints_hold(n, x, i, u);
}

}  // namespace

EvaluationReport evaluate_policy(const Policy& policy, const ControlProblem& problem, const PathSet& eval_paths, Vec x0,
                                 Vec i0, const EvaluationOptions& options) {
    if (policy.fingerprint != problem.fingerprint()) {
        throw ProblemMismatch("policy was fitted on problem '" + policy.problem_name + "', evaluated on '" +
                              problem.name() + "' with a different fingerprint");
    }
    if (policy.horizon != problem.horizon() || eval_paths.steps() != problem.horizon()) {
        throw DimensionMismatch("evaluation paths must span the policy horizon");
    }
    if (static_cast<int>(x0.size()) != problem.exo_dim() || eval_paths.dim() != problem.exo_dim()) {
        throw DimensionMismatch("x0 / evaluation path dimension");
    }
    if (static_cast<int>(i0.size()) != problem.inv_dim()) throw DimensionMismatch("i0 dimension");
    if (!problem.in_bounds(i0)) throw InadmissibleControl("initial inventory outside bounds");

    const detail::Stopwatch clock;
    const int n_steps = problem.horizon();
    const int m_paths = eval_paths.paths();
    const auto q = static_cast<std::size_t>(problem.inv_dim());
    const auto r = static_cast<std::size_t>(problem.control_dim());

    EvaluationReport report;
    report.inv_dim = static_cast<int>(q);
    report.control_dim = static_cast<int>(r);
    report.per_path_values.assign(m_paths, 0.0);
    // Per-path trajectories are always kept internally so the per-step means are
    // reduced in a fixed order.
    std::vector<double> inv(static_cast<std::size_t>(m_paths) * (n_steps + 1) * q);
    std::vector<double> ctl(static_cast<std::size_t>(m_paths) * n_steps * r);
    std::vector<double> rew(static_cast<std::size_t>(m_paths) * n_steps);
    std::vector<int> violations(m_paths, 0);

    parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(problem.exo_dim());
        for (std::size_t mi = begin; mi < end; ++mi) {
            const int m = static_cast<int>(mi);
            double* inv_m = inv.data() + mi * (n_steps + 1) * q;
            std::copy(i0.begin(), i0.end(), inv_m);
            double total = 0.0;
            for (int n = 0; n < n_steps; ++n) {
                const Vec xn = n == 0 ? x0 : eval_paths.state(m, n);
                const Vec i(inv_m + n * q, q);
                const auto d = policy.decide(problem, n, xn, i);
                std::copy(d.next.begin(), d.next.begin() + q, inv_m + (n + 1) * q);
                std::copy(d.u.begin(), d.u.begin() + r, ctl.data() + (mi * n_steps + n) * r);
                rew[mi * n_steps + n] = d.reward;
                total += d.reward;
                if (!decision_ok(problem, n, xn, i, d.control(), d.next_inventory())) ++violations[mi];
            }
            const Vec x_end = n_steps == 0 ? x0 : eval_paths.state(m, n_steps);
            total += problem.terminal_reward(x_end, Vec(inv_m + n_steps * q, q));
            report.per_path_values[mi] = total;
        }
    });

    double sum = 0.0;
    for (double v : report.per_path_values) sum += v;
    report.mean_value = sum / m_paths;
    double ss = 0.0;
    for (double v : report.per_path_values) ss += (v - report.mean_value) * (v - report.mean_value);
    report.std_error = m_paths > 1 ? std::sqrt(ss / (m_paths - 1) / m_paths) : 0.0;
    for (int v : violations) report.constraint_violations += v;

    report.mean_inventory.assign(n_steps + 1, std::vector<double>(q, 0.0));
    report.mean_control.assign(n_steps, std::vector<double>(r, 0.0));
    for (int m = 0; m < m_paths; ++m) {
        for (int n = 0; n <= n_steps; ++n) {
            for (std::size_t d = 0; d < q; ++d) {
                report.mean_inventory[n][d] += inv[(static_cast<std::size_t>(m) * (n_steps + 1) + n) * q + d];
            }
        }
        for (int n = 0; n < n_steps; ++n) {
            for (std::size_t d = 0; d < r; ++d) {
                report.mean_control[n][d] += ctl[(static_cast<std::size_t>(m) * n_steps + n) * r + d];
            }
        }
    }
    for (auto& row : report.mean_inventory) {
        for (double& v : row) v /= m_paths;
    }
    for (auto& row : report.mean_control) {
        for (double& v : row) v /= m_paths;
    }
    if (options.record_trajectories) {
        report.inventory_paths = std::move(inv);
        report.control_paths = std::move(ctl);
        report.reward_paths = std::move(rew);
    }
    report.wall_ms = clock.elapsed_ms();
    return report;
}

EvaluationReport myopic_policy_value(const ControlProblem& problem, const PathSet& eval_paths, Vec x0, Vec i0,
                                     const ArgmaxOptions& argmax, const EvaluationOptions& options) {
    return evaluate_policy(myopic_policy(problem, argmax), problem, eval_paths, x0, i0, options);
}

std::string report_to_json(const EvaluationReport& report, bool include_per_path) {
    nlohmann::json j;
    j["mean_value"] = report.mean_value;
    j["std_error"] = report.std_error;
    j["paths"] = report.per_path_values.size();
    j["constraint_violations"] = report.constraint_violations;
    j["wall_ms"] = report.wall_ms;
    j["mean_inventory"] = report.mean_inventory;
    j["mean_control"] = report.mean_control;
    if (include_per_path) j["per_path_values"] = report.per_path_values;
    return j.dump(1);
}

DpTable exact_dp_oracle(const FiniteChain& chain, const std::vector<std::vector<double>>& inventory_nodes,
                        const ControlProblem& problem) {
    ProcessSpec spec{{chain}};
    validate(spec);
    if (problem.exo_dim() != 1) throw DimensionMismatch("the DP oracle needs a one-dimensional chain state");
    if (!problem.finite_controls()) throw std::invalid_argument("the DP oracle needs a finite control set");
    const auto& controls = std::get<FiniteControls>(problem.controls()).values;
    const int s_count = static_cast<int>(chain.states.size());
    const int k_count = static_cast<int>(inventory_nodes.size());
    const int n_steps = problem.horizon();
    if (k_count == 0) throw std::invalid_argument("the DP oracle needs inventory nodes");

    auto node_index = [&](Vec i) {
        for (int k = 0; k < k_count; ++k) {
            bool same = true;
            for (std::size_t d = 0; d < i.size(); ++d) {
                same = same && std::abs(inventory_nodes[k][d] - i[d]) <= 1e-12 * std::max(1.0, std::abs(i[d]));
            }
            if (same) return k;
        }
        return -1;
    };

    DpTable t;
    t.horizon = n_steps;
    t.states = s_count;
    t.nodes = k_count;
    t.values.assign(static_cast<std::size_t>(n_steps + 1) * s_count * k_count, 0.0);
    t.best_control.assign(static_cast<std::size_t>(n_steps) * s_count * k_count, -1);
    auto at = [&](int n, int s, int k) -> double& {
        return t.values[(static_cast<std::size_t>(n) * s_count + s) * k_count + k];
    };
    for (int s = 0; s < s_count; ++s) {
        for (int k = 0; k < k_count; ++k) at(n_steps, s, k) = problem.terminal_reward(Vec(&chain.states[s], 1), inventory_nodes[k]);
    }
    std::vector<double> next(problem.inv_dim());
    for (int n = n_steps - 1; n >= 0; --n) {
        for (int s = 0; s < s_count; ++s) {
            const Vec x(&chain.states[s], 1);
            for (int k = 0; k < k_count; ++k) {
                const Vec i = inventory_nodes[k];
                double best = -INFINITY;
                int best_c = -1;
                for (std::size_t c = 0; c < controls.size(); ++c) {
                    if (!transition_in_bounds(problem, n, x, controls[c], i, next)) continue;
                    const int kn = node_index(next);
                    if (kn < 0) throw ClosureViolation("transition leaves the inventory node set at step " + std::to_string(n));
                    double cont = 0.0;
                    for (int s2 = 0; s2 < s_count; ++s2) cont += chain.transition[s * s_count + s2] * at(n + 1, s2, kn);
                    const double v = problem.running_reward(n, x, i, controls[c]) + cont;
                    if (v > best) {
                        best = v;
                        best_c = static_cast<int>(c);
                    }
                }
                if (best_c < 0) throw EmptyFeasibleSet("no admissible control at a DP node");
                at(n, s, k) = best;
                t.best_control[(static_cast<std::size_t>(n) * s_count + s) * k_count + k] = best_c;
            }
        }
    }
    return t;
}

}  // namespace invmc

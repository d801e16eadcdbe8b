#include "lemma_suite.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "invmc/benchmarks.hpp"
#include "invmc/rng.hpp"
#include "invmc/solvers.hpp"

namespace invmc::testing {

namespace {

// Increasing F on [0, 1] with F(0) = 0, F(1) = 1: a convex mix of powers and a logistic ramp.
struct RandomRamp {
    double w[3];
    double p[2];
    double centre;
    double steep;
    double operator()(double t) const {
        const double logistic = [&] {
            auto s = [&](double v) { return 1.0 / (1.0 + std::exp(-steep * (v - centre))); };
            return (s(t) - s(0.0)) / (s(1.0) - s(0.0));
        }();
        return w[0] * std::pow(t, p[0]) + w[1] * std::pow(t, p[1]) + w[2] * logistic;
    }
};

}  // namespace

LemmaSuiteResult run_lemma_suite(int maps, int targets_per_map, std::uint64_t seed) {
    const BenchmarkBundle b = build_benchmark("arbitrage");
    const ControlProblem& problem = *b.problem;
    const double cap = problem.inv_max()[0];
    const double dt = 1.0 / 200.0;
    const double u_lo = -11.5;
    const double u_hi = 11.5;
    const double phi_lo = 0.0 + dt * u_hi;
    const double phi_hi = cap + dt * u_lo;
    const std::vector<double> z{5.0};

    LemmaSuiteResult out;
    out.maps = maps;
    for (int k = 0; k < maps; ++k) {
        const PathStream stream(seed, static_cast<std::uint64_t>(k));
        auto uniform = [&](std::uint32_t slot) { return stream.uniforms(0, DrawPurpose::ControlSampling, slot)[0]; };
        RandomRamp ramp{};
        const double a = uniform(0), c = uniform(1), d = uniform(2);
        ramp.w[0] = a;
        ramp.w[1] = c;
        ramp.w[2] = d;
        const double total = a + c + d;
        for (double& w : ramp.w) w /= total;
        ramp.p[0] = 0.3 + 3.0 * uniform(3);
        ramp.p[1] = 0.3 + 3.0 * uniform(4);
        ramp.centre = uniform(5);
        ramp.steep = 1.0 + 60.0 * uniform(6);

        const bool full_range = k % 2 == 0;
        double lo = u_lo;
        double hi = u_hi;
        bool decreasing = true;
        if (!full_range) {
            const double e1 = u_lo + (u_hi - u_lo) * uniform(7);
            const double e2 = u_lo + (u_hi - u_lo) * uniform(8);
            lo = std::min(e1, e2);
            hi = std::max(e1, e2);
            decreasing = uniform(9) < 0.5;
        }
        auto control_map = [&](double y) {
            const double t = std::clamp(y / cap, 0.0, 1.0);
            const double f = ramp(t);
            return std::vector<double>{decreasing ? hi - (hi - lo) * f : lo + (hi - lo) * f};
        };
        auto phi = [&](double y) { return y + dt * control_map(y)[0]; };

        // Strict monotonicity of y -> phi(y), checked on a fine grid.
        bool strictly_monotone = true;
        double prev = phi(0.0);
        for (int g = 1; g <= 4000 && strictly_monotone; ++g) {
            const double cur = phi(cap * g / 4000.0);
            strictly_monotone = cur > prev;
            prev = cur;
        }

        for (int t = 0; t < targets_per_map; ++t) {
            const double v = uniform(100 + static_cast<std::uint32_t>(t));
            const bool inside = t % 2 == 0;
            double y_next;
            if (inside) {
                y_next = phi_lo + v * (phi_hi - phi_lo);
            } else if (t % 4 == 1) {
                y_next = (phi_lo - 1e-7) * v;
            } else {
                y_next = phi_hi + 1e-7 + (cap - phi_hi - 1e-7) * v;
            }
            const BackwardResult r = backward_inventory_step(problem, 0, z, y_next, control_map);
            if (inside) {
                ++out.inside_checked;
                const double residual = r.found ? std::abs(phi(r.antecedent) - y_next) : INFINITY;
                if (!r.found || residual > 1e-9 * cap || r.antecedent < 0.0 || r.antecedent > cap) {
                    ++out.inside_failures;
                } else {
                    out.max_residual = std::max(out.max_residual, residual);
                }
            } else if (full_range && strictly_monotone) {
                ++out.outside_checked;
                if (r.found) ++out.outside_failures;
            }
        }
    }
    return out;
}

}  // namespace invmc::testing

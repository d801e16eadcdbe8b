#include <cmath>
#include <stdexcept>

#include "invmc/solvers.hpp"

namespace invmc {

BackwardResult backward_inventory_step(const ControlProblem& problem, int n, Vec z, double y_next,
                                       const std::function<std::vector<double>(double y)>& control_map,
                                       const BackwardStepOptions& options) {
    if (problem.inv_dim() != 1) throw std::invalid_argument("backward_inventory_step requires inv_dim == 1");
    const double cap = problem.inv_max()[0];
    const double tol = options.tolerance * std::max(cap, 1e-300);

    auto psi = [&](double y) {
        const auto u = control_map(y);
        double next = 0.0;
        problem.transition(n, z, u, Vec(&y, 1), MutVec(&next, 1));
        return y_next - next;
    };

    BackwardResult out;
    const int points = options.scan_points;
    double y_prev = 0.0;
    double psi_prev = psi(0.0);
    if (std::abs(psi_prev) <= tol) return {true, 0.0, std::abs(psi_prev)};
    for (int k = 1; k < points; ++k) {
        const double y = k == points - 1 ? cap : cap * k / (points - 1);
        const double psi_y = psi(y);
        if (std::abs(psi_y) <= tol) return {true, y, std::abs(psi_y)};
        if ((psi_prev < 0.0) != (psi_y < 0.0)) {
            double a = y_prev, fa = psi_prev;
            double b = y;
            for (int it = 0; it < options.max_iterations; ++it) {
                const double mid = 0.5 * (a + b);
                if (mid <= a || mid >= b) break;
                const double fm = psi(mid);
                if (std::abs(fm) <= tol) return {true, mid, std::abs(fm)};
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            // A bracket around a jump of u* converges without a small residual;
            // keep scanning for another sign change.
        }
        y_prev = y;
        psi_prev = psi_y;
    }
    out.found = false;
    return out;
}

}  // namespace invmc

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "invmc/error.hpp"
#include "invmc/model.hpp"

namespace invmc {

/// Upper bound on control and inventory dimensions handled by the argmax.
constexpr int kMaxDim = 8;

struct ArgmaxOptions {
    /// Grid points per control dimension for Box control spaces.
    int resolution = 21;
    /// Golden-section iterations per dimension after the grid scan (0 disables).
    int refine_iterations = 24;
    /// Relative tolerance under which two objective values count as tied.
    double tie_tolerance = 1e-12;
};

struct ArgmaxResult {
    std::array<double, kMaxDim> u{};
    std::array<double, kMaxDim> next{};
    int control_dim = 0;
    int inv_dim = 0;
    /// f + continuation at the maximiser.
    double value = 0.0;
    /// f alone at the maximiser.
    double reward = 0.0;

    Vec control() const { return {u.data(), static_cast<std::size_t>(control_dim)}; }
    Vec next_inventory() const { return {next.data(), static_cast<std::size_t>(inv_dim)}; }
};

namespace detail {

inline bool ties(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

inline double norm2(const double* u, int q) {
    double s = 0.0;
    for (int d = 0; d < q; ++d) s += u[d] * u[d];
    return s;
}

/// True when candidate (value, u) should replace the incumbent.
inline bool better(double value, const double* u, double best_value, const double* best_u, int q, double tol) {
    if (!ties(value, best_value, tol)) return value > best_value;
    const double a = norm2(u, q);
    const double b = norm2(best_u, q);
    if (a != b) return a < b;
    return std::lexicographical_compare(u, u + q, best_u, best_u + q);
}

}  // namespace detail

/// Maximises f(n, x, i, u) + cont(u, i_next) over the admissible controls at
/// (n, x, i), with i_next = phi(n, x, u, i). `cont` is any callable
/// double(Vec u, Vec i_next).
///
/// Finite control sets are scanned exhaustively. Box control spaces are
/// scanned on a uniform grid in nested normalised coordinates (each
/// coordinate spans its feasible interval given the earlier ones in the range
/// order), the admissible point closest to the origin is added as a
/// candidate, and the best point is refined by golden-section search along
/// each coordinate. Ties (relative tolerance) go to the smallest Euclidean
/// norm, then to the lexicographically smallest control.
template <class Cont>
ArgmaxResult argmax_control(const ControlProblem& problem, int n, Vec x, Vec i, Cont&& cont,
                            const ArgmaxOptions& options = {}) {
    const int q = problem.control_dim();
    const int qi = problem.inv_dim();
    if (q > kMaxDim || qi > kMaxDim) throw DimensionMismatch("argmax supports at most 8 control/inventory dimensions");
    ArgmaxResult best;
    best.control_dim = q;
    best.inv_dim = qi;
    bool found = false;
    const double tol = options.tie_tolerance;

    std::array<double, kMaxDim> next{};
    auto consider = [&](const double* u) -> double {
        const Vec uv(u, static_cast<std::size_t>(q));
        const MutVec nv(next.data(), static_cast<std::size_t>(qi));
        if (!transition_in_bounds(problem, n, x, uv, i, nv)) return -std::numeric_limits<double>::infinity();
        const double reward = problem.running_reward(n, x, i, uv);
        const double value = reward + cont(uv, Vec(next.data(), static_cast<std::size_t>(qi)));
        if (!found || detail::better(value, u, best.value, best.u.data(), q, tol)) {
            found = true;
            std::copy(u, u + q, best.u.begin());
            best.next = next;
            best.value = value;
            best.reward = reward;
        }
        return value;
    };

    if (const auto* fin = std::get_if<FiniteControls>(&problem.controls())) {
        for (const auto& u : fin->values) consider(u.data());
        if (!found) throw EmptyFeasibleSet("no admissible control at step " + std::to_string(n));
        return best;
    }

    const auto& order = problem.range_order();
    std::array<double, kMaxDim> u{};
    // Maps normalised coordinates t to a control; false when a range is empty.
    auto map_t = [&](const double* t, double* out) {
        std::fill(out, out + q, 0.0);
        for (int dim : order) {
            const Interval r = problem.control_range(n, x, i, dim, Vec(out, static_cast<std::size_t>(q)));
            if (r.empty()) return false;
            out[dim] = r.lo + t[dim] * (r.hi - r.lo);
        }
        return true;
    };

    // Admissible point nearest the origin, coordinate by coordinate.
    std::array<double, kMaxDim> best_t{};
    bool have_t = false;
    {
        std::array<double, kMaxDim> t{};
        bool ok = true;
        std::fill(u.begin(), u.end(), 0.0);
        for (int dim : order) {
            const Interval r = problem.control_range(n, x, i, dim, Vec(u.data(), static_cast<std::size_t>(q)));
            if (r.empty()) {
                ok = false;
                break;
            }
            u[dim] = std::clamp(0.0, r.lo, r.hi);
            t[dim] = r.hi > r.lo ? (u[dim] - r.lo) / (r.hi - r.lo) : 0.0;
        }
        if (ok && consider(u.data()) > -INFINITY) {
            best_t = t;
            have_t = true;
        }
    }

    const int res = std::max(1, options.resolution);
    std::array<int, kMaxDim> idx{};
    std::array<double, kMaxDim> t{};
    while (true) {
        for (int d = 0; d < q; ++d) t[d] = res == 1 ? 0.5 : static_cast<double>(idx[d]) / (res - 1);
        if (map_t(t.data(), u.data())) {
            const bool was_found = found;
            const auto before = best.u;
            consider(u.data());
            if (!was_found || best.u != before) {
                best_t = t;
                have_t = true;
            }
        }
        int d = 0;
        while (d < q && ++idx[d] == res) idx[d++] = 0;
        if (d == q) break;
    }
    if (!found) throw EmptyFeasibleSet("no admissible control at step " + std::to_string(n));

    if (options.refine_iterations > 0 && have_t && res > 1) {
        constexpr double kInvPhi = 0.6180339887498949;
        const double half = 1.0 / (res - 1);
        std::array<double, kMaxDim> centre = best_t;
        for (int dim : order) {
            auto objective = [&](double s) {
                std::array<double, kMaxDim> tt = centre;
                tt[dim] = s;
                if (!map_t(tt.data(), u.data())) return -std::numeric_limits<double>::infinity();
                const auto before = best.u;
                const bool had = found;
                const double v = consider(u.data());
                if (!had || best.u != before) best_t = tt;
                return v;
            };
            double a = std::max(0.0, centre[dim] - half);
            double b = std::min(1.0, centre[dim] + half);
            double c = b - kInvPhi * (b - a);
            double d = a + kInvPhi * (b - a);
            double fc = objective(c);
            double fd = objective(d);
            for (int it = 0; it < options.refine_iterations; ++it) {
                if (fc >= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - kInvPhi * (b - a);
                    fc = objective(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + kInvPhi * (b - a);
                    fd = objective(d);
                }
            }
            centre = best_t;
        }
    }
    return best;
}

/// Type-erased entry point.
ArgmaxResult argmax_control(const ControlProblem& problem, int n, Vec x, Vec i,
                            const std::function<double(Vec u, Vec i_next)>& continuation,
                            const ArgmaxOptions& options = {});

}  // namespace invmc

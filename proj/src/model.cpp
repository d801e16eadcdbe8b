#include "invmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "invmc/error.hpp"

namespace invmc {

namespace {

constexpr double kBoundTolerance = 1e-12;

void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g,", v);
    out += buf;
}

std::string canonical_text(const ProblemDefinition& def) {
    std::string text = def.name + "|" + def.descriptor + "|";
    text += std::to_string(def.horizon) + "," + std::to_string(def.exo_dim) + "," + std::to_string(def.inv_dim) + "|";
    for (double v : def.inv_max) append_number(text, v);
    text += "|";
    if (const auto* fin = std::get_if<FiniteControls>(&def.controls)) {
        for (const auto& u : fin->values) {
            for (double v : u) append_number(text, v);
            text += ";";
        }
    } else {
        const auto& box = std::get<BoxControls>(def.controls);
        for (double v : box.lower) append_number(text, v);
        for (double v : box.upper) append_number(text, v);
    }
    return text;
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ControlProblem::ControlProblem(ProblemDefinition def) : def_(std::move(def)) {
    if (def_.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (def_.exo_dim < 1 || def_.inv_dim < 1) throw std::invalid_argument("exo_dim and inv_dim must be >= 1");
    if (static_cast<int>(def_.inv_max.size()) != def_.inv_dim) {
        throw DimensionMismatch("inv_max has " + std::to_string(def_.inv_max.size()) + " entries, inv_dim is " +
                                std::to_string(def_.inv_dim));
    }
    for (double m : def_.inv_max) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("inventory capacities must be finite and >= 0");
    }
    if (!def_.running_reward || !def_.terminal_reward) throw std::invalid_argument("rewards must be set");

    if (const auto* fin = std::get_if<FiniteControls>(&def_.controls)) {
        if (fin->values.empty()) throw std::invalid_argument("finite control set is empty");
        control_dim_ = static_cast<int>(fin->values.front().size());
        for (const auto& u : fin->values) {
            if (static_cast<int>(u.size()) != control_dim_) throw DimensionMismatch("ragged finite control set");
        }
    } else {
        const auto& box = std::get<BoxControls>(def_.controls);
        if (box.lower.size() != box.upper.size() || box.lower.empty()) {
            throw DimensionMismatch("box control bounds must be non-empty and of equal length");
        }
        control_dim_ = static_cast<int>(box.lower.size());
        for (std::size_t d = 0; d < box.lower.size(); ++d) {
            if (box.lower[d] > box.upper[d]) throw std::invalid_argument("box control lower bound exceeds upper bound");
        }
        if (!def_.additive && !def_.feasible_range) {
            throw std::invalid_argument("box control spaces need an additive transition or a feasible_range callback");
        }
    }

    if (def_.additive) {
        auto& add = *def_.additive;
        if (control_dim_ != def_.inv_dim || static_cast<int>(add.scale.size()) != def_.inv_dim) {
            throw DimensionMismatch("additive transition needs control_dim == inv_dim == scale.size()");
        }
        if (add.drift.empty()) add.drift.assign(def_.inv_dim, 0.0);
        if (static_cast<int>(add.drift.size()) != def_.inv_dim) throw DimensionMismatch("additive drift size");
        for (double s : add.scale) {
            if (s == 0.0) throw std::invalid_argument("additive transition scale must be non-zero");
        }
        if (!def_.transition) {
            const AdditiveTransition a = add;
            def_.transition = [a](int, Vec, Vec u, Vec i, MutVec next) {
                for (std::size_t d = 0; d < i.size(); ++d) next[d] = i[d] + a.scale[d] * u[d] + a.drift[d];
            };
        }
    }
    if (!def_.transition) throw std::invalid_argument("transition must be set");

    range_order_ = def_.range_order;
    if (range_order_.empty()) {
        for (int d = 0; d < control_dim_; ++d) range_order_.push_back(d);
    }
    if (static_cast<int>(range_order_.size()) != control_dim_) throw DimensionMismatch("range_order size");

    fingerprint_ = fnv1a(canonical_text(def_));
}

bool ControlProblem::constraints_hold(int n, Vec x, Vec i, Vec u) const {
    return !def_.constraint_check || def_.constraint_check(n, x, i, u);
}

double ControlProblem::bound_tolerance(int d) const {
    return kBoundTolerance * std::max(1.0, def_.inv_max[d]);
}

bool ControlProblem::in_bounds(Vec i, double tol_scale) const {
    for (int d = 0; d < def_.inv_dim; ++d) {
        const double tol = bound_tolerance(d) * tol_scale;
        if (!(i[d] >= -tol && i[d] <= def_.inv_max[d] + tol)) return false;
    }
    return true;
}

Interval ControlProblem::control_range(int n, Vec x, Vec i, int dim, Vec u) const {
    const auto& box = std::get<BoxControls>(def_.controls);
    Interval r{box.lower[dim], box.upper[dim]};
    if (def_.feasible_range) {
        const Interval c = def_.feasible_range(n, x, i, dim, u);
        r.lo = std::max(r.lo, c.lo);
        r.hi = std::min(r.hi, c.hi);
    } else {
        const auto& a = *def_.additive;
        const double s = a.scale[dim];
        double lo = (0.0 - i[dim] - a.drift[dim]) / s;
        double hi = (def_.inv_max[dim] - i[dim] - a.drift[dim]) / s;
        if (s < 0) std::swap(lo, hi);
        r.lo = std::max(r.lo, lo);
        r.hi = std::min(r.hi, hi);
    }
    // Rounding can produce a hair-thin inverted interval at a boundary.
    if (r.lo > r.hi && r.lo - r.hi <= 1e-12 * std::max(1.0, std::abs(r.lo))) r.hi = r.lo;
    return r;
}

bool transition_in_bounds(const ControlProblem& problem, int n, Vec x, Vec u, Vec i, MutVec next) {
    problem.transition(n, x, u, i, next);
    const auto& cap = problem.inv_max();
    for (int d = 0; d < problem.inv_dim(); ++d) {
        const double tol = problem.bound_tolerance(d);
        if (!(next[d] >= -tol && next[d] <= cap[d] + tol)) return false;
        next[d] = std::clamp(next[d], 0.0, cap[d]);
    }
    return true;
}

std::vector<double> apply_transition(const ControlProblem& problem, int n, Vec x, Vec u, Vec i) {
    if (static_cast<int>(u.size()) != problem.control_dim() || static_cast<int>(i.size()) != problem.inv_dim()) {
        throw DimensionMismatch("apply_transition: control or inventory dimension mismatch");
    }
    std::vector<double> next(problem.inv_dim());
    if (!transition_in_bounds(problem, n, x, u, i, next)) {
        std::string msg = "control leaves inventory bounds at step " + std::to_string(n) + ": next = (";
        problem.transition(n, x, u, i, next);
        for (std::size_t d = 0; d < next.size(); ++d) msg += (d ? ", " : "") + std::to_string(next[d]);
        throw InadmissibleControl(msg + ")");
    }
    return next;
}

AdmissibleControlSet::AdmissibleControlSet(const ControlProblem& problem, int n, Vec x, Vec i)
    : problem_(&problem), n_(n), x_(x.begin(), x.end()), i_(i.begin(), i.end()), finite_(problem.finite_controls()) {
    if (finite_) {
        std::vector<double> next(problem.inv_dim());
        for (const auto& u : std::get<FiniteControls>(problem.controls()).values) {
            if (transition_in_bounds(problem, n, x, u, i, next)) members_.push_back(u);
        }
    }
}

Interval AdmissibleControlSet::range(int dim, Vec u) const {
    if (finite_) throw std::logic_error("range() is only defined for box control spaces");
    return problem_->control_range(n_, x_, i_, dim, u);
}

bool AdmissibleControlSet::contains(Vec u, double tol) const {
    if (static_cast<int>(u.size()) != problem_->control_dim()) return false;
    if (finite_) {
        for (const auto& m : members_) {
            bool same = true;
            for (std::size_t d = 0; d < m.size(); ++d) same = same && std::abs(m[d] - u[d]) <= tol;
            if (same) return true;
        }
        return false;
    }
    for (int dim : problem_->range_order()) {
        const Interval r = problem_->control_range(n_, x_, i_, dim, u);
        const double scale = std::max(1.0, std::max(std::abs(r.lo), std::abs(r.hi)));
        if (u[dim] < r.lo - tol * scale || u[dim] > r.hi + tol * scale) return false;
    }
    std::vector<double> next(problem_->inv_dim());
    problem_->transition(n_, x_, u, i_, next);
    return problem_->in_bounds(next, tol / 1e-12);
}

AdmissibleControlSet admissible_controls(const ControlProblem& problem, int n, Vec x, Vec i) {
    if (static_cast<int>(i.size()) != problem.inv_dim() || static_cast<int>(x.size()) != problem.exo_dim()) {
        throw DimensionMismatch("admissible_controls: state dimension mismatch");
    }
    if (!problem.in_bounds(i)) throw InadmissibleControl("admissible_controls: inventory outside bounds");
    AdmissibleControlSet set(problem, n, x, i);
    if (set.is_finite()) {
        if (set.members().empty()) throw EmptyFeasibleSet("no admissible control at step " + std::to_string(n));
    } else {
        std::vector<double> u(problem.control_dim(), 0.0);
        for (int dim : set.order()) {
            const Interval r = set.range(dim, u);
            if (r.empty()) throw EmptyFeasibleSet("no admissible control at step " + std::to_string(n));
            u[dim] = r.lo;
        }
    }
    return set;
}

}  // namespace invmc

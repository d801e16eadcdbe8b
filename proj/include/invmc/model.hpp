#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace invmc {

using Vec = std::span<const double>;
using MutVec = std::span<double>;

/// Closed interval; empty when lo > hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return lo > hi; }
    double width() const { return hi - lo; }
};

/// Explicit list of control vectors.
struct FiniteControls {
    std::vector<std::vector<double>> values;
};

/// Per-dimension control bounds [lower, upper].
struct BoxControls {
    std::vector<double> lower;
    std::vector<double> upper;
};

using ControlSpace = std::variant<FiniteControls, BoxControls>;

/// i' = i + scale * u + drift, componentwise. Requires control_dim == inv_dim.
struct AdditiveTransition {
    std::vector<double> scale;
    std::vector<double> drift;
};

using TransitionFn = std::function<void(int n, Vec x, Vec u, Vec i, MutVec next)>;
using RewardFn = std::function<double(int n, Vec x, Vec i, Vec u)>;
using TerminalFn = std::function<double(Vec x, Vec i)>;
/// Feasible interval of control coordinate `dim` at (n, x, i), given the
/// coordinates that precede it in the problem's range order (already set in u).
using RangeFn = std::function<Interval(int n, Vec x, Vec i, int dim, Vec u)>;
/// Domain constraints beyond inventory bounds (checked by evaluation reports).
using ConstraintFn = std::function<bool(int n, Vec x, Vec i, Vec u)>;

/// Everything needed to build a ControlProblem. Either `transition` or
/// `additive` must be set; Box control spaces additionally need `additive`
/// or `feasible_range`.
struct ProblemDefinition {
    std::string name = "custom";
    /// Canonical text describing every parameter; hashed into the fingerprint.
    std::string descriptor;
    int horizon = 1;
    int exo_dim = 1;
    int inv_dim = 1;
    std::vector<double> inv_max;
    ControlSpace controls;
    TransitionFn transition;
    std::optional<AdditiveTransition> additive;
    RewardFn running_reward;
    TerminalFn terminal_reward;
    RangeFn feasible_range;
    std::vector<int> range_order;
    ConstraintFn constraint_check;
};

/// Discrete-time control problem with an uncontrolled exogenous state x and a
/// deterministically controlled inventory i in the box [0, inv_max].
/// Immutable after construction.
class ControlProblem {
public:
    explicit ControlProblem(ProblemDefinition def);

    const std::string& name() const { return def_.name; }
    const std::string& descriptor() const { return def_.descriptor; }
    int horizon() const { return def_.horizon; }
    int exo_dim() const { return def_.exo_dim; }
    int inv_dim() const { return def_.inv_dim; }
    int control_dim() const { return control_dim_; }
    const std::vector<double>& inv_max() const { return def_.inv_max; }
    const ControlSpace& controls() const { return def_.controls; }
    bool finite_controls() const { return std::holds_alternative<FiniteControls>(def_.controls); }
    const std::optional<AdditiveTransition>& additive() const { return def_.additive; }
    const std::vector<int>& range_order() const { return range_order_; }
    bool has_constraint_check() const { return static_cast<bool>(def_.constraint_check); }
    std::uint64_t fingerprint() const { return fingerprint_; }

    void transition(int n, Vec x, Vec u, Vec i, MutVec next) const { def_.transition(n, x, u, i, next); }
    double running_reward(int n, Vec x, Vec i, Vec u) const { return def_.running_reward(n, x, i, u); }
    double terminal_reward(Vec x, Vec i) const { return def_.terminal_reward(x, i); }
    bool constraints_hold(int n, Vec x, Vec i, Vec u) const;

    /// Feasible interval for Box coordinate `dim` given earlier coordinates in u.
    Interval control_range(int n, Vec x, Vec i, int dim, Vec u) const;

    /// Absolute tolerance on inventory bounds for dimension d.
    double bound_tolerance(int d) const;
    bool in_bounds(Vec i, double tol_scale = 1.0) const;

private:
    ProblemDefinition def_;
    int control_dim_ = 0;
    std::vector<int> range_order_;
    std::uint64_t fingerprint_ = 0;
};

/// Feasible subset of the control space at (n, x, i).
class AdmissibleControlSet {
public:
    AdmissibleControlSet(const ControlProblem& problem, int n, Vec x, Vec i);

    bool is_finite() const { return finite_; }
    /// Feasible controls (FiniteSet spaces only).
    const std::vector<std::vector<double>>& members() const { return members_; }
    /// Interval of coordinate `dim` given earlier coordinates (Box spaces only).
    Interval range(int dim, Vec u) const;
    const std::vector<int>& order() const { return problem_->range_order(); }
    bool contains(Vec u, double tol = 1e-9) const;

private:
    const ControlProblem* problem_;
    int n_;
    std::vector<double> x_;
    std::vector<double> i_;
    bool finite_;
    std::vector<std::vector<double>> members_;
};

/// Controls u with u in the control space and phi(n, x, u, i) inside the
/// inventory bounds. Throws EmptyFeasibleSet when none exists.
AdmissibleControlSet admissible_controls(const ControlProblem& problem, int n, Vec x, Vec i);

/// phi(n, x, u, i), clamped into bounds when within tolerance; throws
/// InadmissibleControl when a bound is violated by more than the tolerance.
std::vector<double> apply_transition(const ControlProblem& problem, int n, Vec x, Vec u, Vec i);

/// In-place variant used on hot paths: returns false instead of throwing.
bool transition_in_bounds(const ControlProblem& problem, int n, Vec x, Vec u, Vec i, MutVec next);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

}  // namespace invmc

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "invmc/model.hpp"
#include "invmc/processes.hpp"

namespace invmc {

enum class BasisKind { PolyProduct, PolyWithControl, ExoOnly, HypercubeAffine };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& text);

/// Per-coordinate affine map v -> (v - center) / half_width.
struct AffineScaling {
    std::vector<double> center;
    std::vector<double> half_width;
    bool is_identity() const;
};

/// Half-open box [lower, upper) in raw (x, i) coordinates.
struct HyperBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// A basis over (x, i), or (x, i, u) for PolyWithControl.
///
/// Polynomial kinds store one exponent vector per term, laid out as
/// [x_1..x_p, i_1..i_q, u_1..u_r] (r = 0 unless PolyWithControl, q = 0 for
/// ExoOnly). Monomials are evaluated on scaled coordinates.
///
/// HypercubeAffine contributes 1 + p + q terms per box:
/// 1{(x,i) in B}, 1{(x,i) in B} x_d, 1{(x,i) in B} i_j (raw coordinates).
struct BasisSpec {
    BasisKind kind = BasisKind::PolyProduct;
    int exo_dim = 1;
    int inv_dim = 1;
    int control_dim = 0;
    std::vector<std::vector<int>> terms;
    std::vector<HyperBox> boxes;
    AffineScaling scaling;
    /// Solvers replace `scaling` by auto_scaling() before fitting when set.
    bool auto_scale = false;

    int size() const;
    int coords() const;
    int max_degree(int coord) const;
};

/// Rejects duplicate terms, wrong exponent lengths, overlapping boxes, bad scaling.
void validate(const BasisSpec& spec);

/// Builders for common term sets. `degrees` are maxima per coordinate.
std::vector<std::vector<int>> tensor_terms(const std::vector<int>& degrees);
/// All exponent vectors over `dims` coordinates with total degree <= max_total.
std::vector<std::vector<int>> total_degree_terms(int dims, int max_total);
/// Concatenation product: every a in A joined with every b in B.
std::vector<std::vector<int>> product_terms(const std::vector<std::vector<int>>& a,
                                            const std::vector<std::vector<int>>& b);

BasisSpec poly_product(int exo_dim, int inv_dim, std::vector<std::vector<int>> terms);
BasisSpec poly_with_control(int exo_dim, int inv_dim, int control_dim, std::vector<std::vector<int>> terms);
BasisSpec exo_only(int exo_dim, std::vector<std::vector<int>> terms);
BasisSpec hypercube_affine(int exo_dim, int inv_dim, std::vector<HyperBox> boxes);
/// Regular grid of boxes over [lower, upper] with `cells` cells per coordinate.
std::vector<HyperBox> regular_boxes(const std::vector<double>& lower, const std::vector<double>& upper,
                                    const std::vector<int>& cells);

/// Scaling from inventory capacities, control bounds and the 0.5% / 99.5%
/// quantiles of each exogenous coordinate over all paths and steps.
AffineScaling auto_scaling(const BasisSpec& spec, const ControlProblem& problem, const PathSet& paths);

/// phi_k at (x, i[, u]). `i` is ignored for ExoOnly, `u` required iff PolyWithControl.
Eigen::VectorXd eval_basis(const BasisSpec& spec, Vec x, Vec i, Vec u = {});
void eval_basis_into(const BasisSpec& spec, Vec x, Vec i, Vec u, double* out);

/// E[phi_k(X_{n+1}, i_next) | X_n = x].
Eigen::VectorXd eval_conditional_basis(const BasisSpec& spec, const ProcessSpec& process, int n, Vec x, Vec i_next);

/// i -> sum_k alpha_k g_k(i) where the exogenous factors have been folded into
/// the coefficients. Produced by conditioning on x (regress-later) or by
/// evaluating the exogenous part at a point.
class InventoryFunction {
public:
    InventoryFunction() = default;
    double operator()(Vec i) const;
    bool is_zero() const { return poly_coef_.empty() && pieces_.empty(); }

    /// Inventory exponent groups of a polynomial basis, shared between contractions.
    struct Layout;

private:
    friend InventoryFunction contract_conditional(const BasisSpec&, const ProcessSpec&, int, Vec,
                                                  const Eigen::VectorXd&);
    friend InventoryFunction contract_at(const BasisSpec&, Vec, const Eigen::VectorXd&);
    struct Piece {
        std::vector<double> lower;
        std::vector<double> upper;
        double constant;
        std::vector<double> slope;
    };
    int inv_dim_ = 0;
    std::shared_ptr<const Layout> layout_;
    std::vector<double> poly_coef_;
    std::vector<Piece> pieces_;
};

/// Regress-later continuation: i_next -> alpha . eval_conditional_basis(spec, process, n, x, i_next).
InventoryFunction contract_conditional(const BasisSpec& spec, const ProcessSpec& process, int n, Vec x,
                                       const Eigen::VectorXd& alpha);
/// i -> alpha . eval_basis(spec, x, i) with x fixed.
InventoryFunction contract_at(const BasisSpec& spec, Vec x, const Eigen::VectorXd& alpha);

/// u -> alpha . eval_basis(spec, x, i, u) for PolyWithControl with (x, i) fixed.
class ControlFunction {
public:
    double operator()(Vec u) const;

private:
    friend ControlFunction contract_control(const BasisSpec&, Vec, Vec, const Eigen::VectorXd&);
    std::vector<double> center_;
    std::vector<double> half_width_;
    std::vector<std::vector<int>> powers_;
    std::vector<double> coef_;
    std::vector<int> max_power_;
};

ControlFunction contract_control(const BasisSpec& spec, Vec x, Vec i, const Eigen::VectorXd& alpha);

}  // namespace invmc

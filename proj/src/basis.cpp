#include "invmc/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "invmc/error.hpp"

namespace invmc {

struct InventoryFunction::Layout {
    BasisKind kind;
    int exo_dim;
    int inv_dim;
    std::vector<std::vector<int>> terms;
    AffineScaling scaling;
    std::vector<int> group_of;
    std::vector<std::vector<int>> powers;
    std::vector<double> center;
    std::vector<double> half_width;
    std::vector<int> max_power;
    std::vector<int> max_exo_degree;

    bool matches(const BasisSpec& spec) const {
        return kind == spec.kind && exo_dim == spec.exo_dim && inv_dim == spec.inv_dim && terms == spec.terms &&
               scaling.center == spec.scaling.center && scaling.half_width == spec.scaling.half_width;
    }
};

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return r;
}

double scaled(const AffineScaling& s, int coord, double v) {
    if (s.center.empty()) return v;
    return (v - s.center[coord]) / s.half_width[coord];
}

// pow_table[e] = v^e for e = 0..max_degree.
void fill_powers(double v, int max_degree, double* pow_table) {
    pow_table[0] = 1.0;
    for (int e = 1; e <= max_degree; ++e) pow_table[e] = pow_table[e - 1] * v;
}

bool in_box(const HyperBox& box, int offset, Vec v) {
    for (std::size_t d = 0; d < v.size(); ++d) {
        if (!(v[d] >= box.lower[offset + d] && v[d] < box.upper[offset + d])) return false;
    }
    return true;
}

// E[((X' - c) / h)^e | x], e = 0..max_degree, from raw conditional moments.
std::vector<double> scaled_moments(const ProcessComponent& comp, int n, double x, int max_degree, double c, double h) {
    const auto raw = conditional_poly_moments(comp, n, x, max_degree);
    std::vector<double> out(max_degree + 1, 0.0);
    for (int e = 0; e <= max_degree; ++e) {
        double total = 0.0;
        for (int k = 0; k <= e; ++k) total += binomial(e, k) * raw[k] * std::pow(-c, e - k);
        out[e] = total / std::pow(h, e);
    }
    return out;
}

void check_dims(const BasisSpec& spec, Vec x, Vec i, Vec u) {
    if (static_cast<int>(x.size()) != spec.exo_dim) throw DimensionMismatch("basis: exogenous state dimension");
    if (spec.kind != BasisKind::ExoOnly && static_cast<int>(i.size()) != spec.inv_dim) {
        throw DimensionMismatch("basis: inventory dimension");
    }
    if (spec.kind == BasisKind::PolyWithControl) {
        if (static_cast<int>(u.size()) != spec.control_dim) throw DimensionMismatch("basis: control dimension");
    } else if (!u.empty()) {
        throw DimensionMismatch("basis: control given to a basis without control terms");
    }
}

// Groups terms by the exponents of coordinates [begin, end). Returns group id per term
// and the distinct exponent vectors.
void group_terms(const BasisSpec& spec, int begin, int end, std::vector<int>& group_of,
                 std::vector<std::vector<int>>& groups) {
    group_of.assign(spec.terms.size(), -1);
    groups.clear();
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        std::vector<int> key(spec.terms[k].begin() + begin, spec.terms[k].begin() + end);
        auto it = std::find(groups.begin(), groups.end(), key);
        if (it == groups.end()) {
            group_of[k] = static_cast<int>(groups.size());
            groups.push_back(std::move(key));
        } else {
            group_of[k] = static_cast<int>(it - groups.begin());
        }
    }
}

}  // namespace

std::string to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::PolyProduct: return "PolyProduct";
        case BasisKind::PolyWithControl: return "PolyWithControl";
        case BasisKind::ExoOnly: return "ExoOnly";
        case BasisKind::HypercubeAffine: return "HypercubeAffine";
    }
    return "?";
}

BasisKind basis_kind_from_string(const std::string& text) {
    for (BasisKind k : {BasisKind::PolyProduct, BasisKind::PolyWithControl, BasisKind::ExoOnly,
                        BasisKind::HypercubeAffine}) {
        if (to_string(k) == text) return k;
    }
    throw std::invalid_argument("unknown basis kind '" + text + "'");
}

bool AffineScaling::is_identity() const {
    for (std::size_t d = 0; d < center.size(); ++d) {
        if (center[d] != 0.0 || half_width[d] != 1.0) return false;
    }
    return true;
}

int BasisSpec::coords() const {
    switch (kind) {
        case BasisKind::ExoOnly: return exo_dim;
        case BasisKind::PolyWithControl: return exo_dim + inv_dim + control_dim;
        default: return exo_dim + inv_dim;
    }
}

int BasisSpec::size() const {
    if (kind == BasisKind::HypercubeAffine) return static_cast<int>(boxes.size()) * (1 + exo_dim + inv_dim);
    return static_cast<int>(terms.size());
}

int BasisSpec::max_degree(int coord) const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t[coord]);
    return m;
}

void validate(const BasisSpec& spec) {
    if (spec.exo_dim < 1 || spec.inv_dim < 0 || spec.control_dim < 0) throw DimensionMismatch("basis dimensions");
    if (spec.kind == BasisKind::PolyWithControl && spec.control_dim < 1) {
        throw DimensionMismatch("PolyWithControl needs control_dim >= 1");
    }
    if (spec.size() < 1) throw std::invalid_argument("basis has no terms");
    const int coords = spec.coords();
    if (!spec.scaling.center.empty()) {
        if (static_cast<int>(spec.scaling.center.size()) != coords ||
            static_cast<int>(spec.scaling.half_width.size()) != coords) {
            throw DimensionMismatch("basis scaling must have one entry per coordinate");
        }
        for (double h : spec.scaling.half_width) {
            if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("basis scaling half-width must be > 0");
        }
    }
    if (spec.kind == BasisKind::HypercubeAffine) {
        for (const auto& b : spec.boxes) {
            if (static_cast<int>(b.lower.size()) != coords || static_cast<int>(b.upper.size()) != coords) {
                throw DimensionMismatch("hypercube box dimension");
            }
            for (int d = 0; d < coords; ++d) {
                if (!(b.lower[d] < b.upper[d])) throw std::invalid_argument("hypercube box with empty side");
            }
        }
        for (std::size_t a = 0; a < spec.boxes.size(); ++a) {
            for (std::size_t b = a + 1; b < spec.boxes.size(); ++b) {
                bool overlap = true;
                for (int d = 0; d < coords && overlap; ++d) {
                    overlap = spec.boxes[a].lower[d] < spec.boxes[b].upper[d] &&
                              spec.boxes[b].lower[d] < spec.boxes[a].upper[d];
                }
                if (overlap) throw std::invalid_argument("hypercube boxes overlap");
            }
        }
        return;
    }
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        const auto& t = spec.terms[k];
        if (static_cast<int>(t.size()) != coords) throw DimensionMismatch("basis term exponent length");
        for (int e : t) {
            if (e < 0) throw std::invalid_argument("negative exponent in basis term");
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (spec.terms[j] == t) throw std::invalid_argument("duplicate basis term");
        }
    }
}

std::vector<std::vector<int>> tensor_terms(const std::vector<int>& degrees) {
    std::vector<std::vector<int>> out{{}};
    for (int deg : degrees) {
        std::vector<std::vector<int>> next;
        for (int e = 0; e <= deg; ++e) {
            for (const auto& t : out) {
                auto v = t;
                v.push_back(e);
                next.push_back(std::move(v));
            }
        }
        out = std::move(next);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        int sa = 0, sb = 0;
        for (int e : a) sa += e;
        for (int e : b) sb += e;
        return sa < sb;
    });
    return out;
}

std::vector<std::vector<int>> total_degree_terms(int dims, int max_total) {
    std::vector<int> degrees(dims, max_total);
    auto all = tensor_terms(degrees);
    std::vector<std::vector<int>> out;
    for (auto& t : all) {
        int s = 0;
        for (int e : t) s += e;
        if (s <= max_total) out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::vector<int>> product_terms(const std::vector<std::vector<int>>& a,
                                            const std::vector<std::vector<int>>& b) {
    std::vector<std::vector<int>> out;
    for (const auto& tb : b) {
        for (const auto& ta : a) {
            auto v = ta;
            v.insert(v.end(), tb.begin(), tb.end());
            out.push_back(std::move(v));
        }
    }
    return out;
}

BasisSpec poly_product(int exo_dim, int inv_dim, std::vector<std::vector<int>> terms) {
    BasisSpec s;
    s.kind = BasisKind::PolyProduct;
    s.exo_dim = exo_dim;
    s.inv_dim = inv_dim;
    s.terms = std::move(terms);
    validate(s);
    return s;
}

BasisSpec poly_with_control(int exo_dim, int inv_dim, int control_dim, std::vector<std::vector<int>> terms) {
    BasisSpec s;
    s.kind = BasisKind::PolyWithControl;
    s.exo_dim = exo_dim;
    s.inv_dim = inv_dim;
    s.control_dim = control_dim;
    s.terms = std::move(terms);
    validate(s);
    return s;
}

BasisSpec exo_only(int exo_dim, std::vector<std::vector<int>> terms) {
    BasisSpec s;
    s.kind = BasisKind::ExoOnly;
    s.exo_dim = exo_dim;
    s.inv_dim = 0;
    s.terms = std::move(terms);
    validate(s);
    return s;
}

BasisSpec hypercube_affine(int exo_dim, int inv_dim, std::vector<HyperBox> boxes) {
    BasisSpec s;
    s.kind = BasisKind::HypercubeAffine;
    s.exo_dim = exo_dim;
    s.inv_dim = inv_dim;
    s.boxes = std::move(boxes);
    validate(s);
    return s;
}

std::vector<HyperBox> regular_boxes(const std::vector<double>& lower, const std::vector<double>& upper,
                                    const std::vector<int>& cells) {
    const std::size_t dims = lower.size();
    if (upper.size() != dims || cells.size() != dims) throw DimensionMismatch("regular_boxes argument sizes");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<HyperBox> out{{{}, {}}};
    for (std::size_t d = 0; d < dims; ++d) {
        if (cells[d] < 1 || !(lower[d] < upper[d])) throw std::invalid_argument("regular_boxes: bad range");
        std::vector<HyperBox> next;
        const double h = (upper[d] - lower[d]) / cells[d];
        for (int c = 0; c < cells[d]; ++c) {
            const double lo = c == 0 ? -inf : lower[d] + c * h;
            const double hi = c == cells[d] - 1 ? inf : lower[d] + (c + 1) * h;
            for (const auto& b : out) {
                HyperBox nb = b;
                nb.lower.push_back(lo);
                nb.upper.push_back(hi);
                next.push_back(std::move(nb));
            }
        }
        out = std::move(next);
    }
    return out;
}

AffineScaling auto_scaling(const BasisSpec& spec, const ControlProblem& problem, const PathSet& paths) {
    AffineScaling s;
    auto push = [&](double lo, double hi) {
        double c = 0.5 * (lo + hi);
        double h = 0.5 * (hi - lo);
        if (!(h > 0.0) || !std::isfinite(h)) h = 1.0;
        if (!std::isfinite(c)) c = 0.0;
        s.center.push_back(c);
        s.half_width.push_back(h);
    };
    const std::size_t total = static_cast<std::size_t>(paths.paths()) * (paths.steps() + 1);
    const std::size_t stride = std::max<std::size_t>(1, total / 200000);
    for (int d = 0; d < spec.exo_dim; ++d) {
        std::vector<double> v;
        v.reserve(total / stride + 1);
        for (std::size_t idx = 0; idx < total; idx += stride) v.push_back(paths.values()[idx * paths.dim() + d]);
        auto quantile = [&](double q) {
            const std::size_t k = static_cast<std::size_t>(q * (v.size() - 1));
            std::nth_element(v.begin(), v.begin() + k, v.end());
            return v[k];
        };
        const double lo = quantile(0.005);
        const double hi = quantile(0.995);
        push(lo, hi);
    }
    if (spec.kind != BasisKind::ExoOnly) {
        for (int d = 0; d < spec.inv_dim; ++d) push(0.0, problem.inv_max()[d]);
    }
    if (spec.kind == BasisKind::PolyWithControl) {
        for (int d = 0; d < spec.control_dim; ++d) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            if (const auto* fin = std::get_if<FiniteControls>(&problem.controls())) {
                for (const auto& u : fin->values) {
                    lo = std::min(lo, u[d]);
                    hi = std::max(hi, u[d]);
                }
            } else {
                const auto& box = std::get<BoxControls>(problem.controls());
                lo = box.lower[d];
                hi = box.upper[d];
            }
            push(lo, hi);
        }
    }
    return s;
}

void eval_basis_into(const BasisSpec& spec, Vec x, Vec i, Vec u, double* out) {
    check_dims(spec, x, i, u);
    if (spec.kind == BasisKind::HypercubeAffine) {
        const int p = spec.exo_dim;
        const int q = spec.inv_dim;
        const int per = 1 + p + q;
        std::fill(out, out + spec.size(), 0.0);
        for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
            const auto& box = spec.boxes[b];
            if (!in_box(box, 0, x) || !in_box(box, p, i)) continue;
            double* o = out + b * per;
            o[0] = 1.0;
            for (int d = 0; d < p; ++d) o[1 + d] = x[d];
            for (int d = 0; d < q; ++d) o[1 + p + d] = i[d];
        }
        return;
    }
    const int coords = spec.coords();
    double vals[64];
    if (coords > 64) throw DimensionMismatch("basis supports at most 64 coordinates");
    int c = 0;
    for (double v : x) vals[c] = scaled(spec.scaling, c, v), ++c;
    if (spec.kind != BasisKind::ExoOnly) {
        for (double v : i) vals[c] = scaled(spec.scaling, c, v), ++c;
    }
    for (double v : u) vals[c] = scaled(spec.scaling, c, v), ++c;
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        double prod = 1.0;
        const auto& t = spec.terms[k];
        for (int d = 0; d < coords; ++d) {
            for (int e = 0; e < t[d]; ++e) prod *= vals[d];
        }
        out[k] = prod;
    }
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, Vec x, Vec i, Vec u) {
    Eigen::VectorXd out(spec.size());
    eval_basis_into(spec, x, i, u, out.data());
    return out;
}

Eigen::VectorXd eval_conditional_basis(const BasisSpec& spec, const ProcessSpec& process, int n, Vec x, Vec i_next) {
    if (spec.kind == BasisKind::PolyWithControl) {
        throw UnsupportedMoment("conditional expectations are not defined for control-dependent bases");
    }
    if (process.dim() != spec.exo_dim) throw DimensionMismatch("basis and process dimensions differ");
    check_dims(spec, x, i_next, {});
    const int p = spec.exo_dim;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.size());

    if (spec.kind == BasisKind::HypercubeAffine) {
        const int q = spec.inv_dim;
        const int per = 1 + p + q;
        for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
            const auto& box = spec.boxes[b];
            if (!in_box(box, p, i_next)) continue;
            std::vector<std::array<double, 2>> t(p);
            for (int d = 0; d < p; ++d) {
                const auto m = conditional_truncated_moments(process.components[d], n, x[d], box.lower[d],
                                                             box.upper[d], 1);
                t[d] = {m[0], m[1]};
            }
            double e0 = 1.0;
            for (int d = 0; d < p; ++d) e0 *= t[d][0];
            const std::size_t base = b * per;
            out[base] = e0;
            for (int d = 0; d < p; ++d) {
                double e = t[d][1];
                for (int d2 = 0; d2 < p; ++d2) {
                    if (d2 != d) e *= t[d2][0];
                }
                out[base + 1 + d] = e;
            }
            for (int j = 0; j < q; ++j) out[base + 1 + p + j] = e0 * i_next[j];
        }
        return out;
    }

    std::vector<std::vector<double>> moments(p);
    for (int d = 0; d < p; ++d) {
        const double c = spec.scaling.center.empty() ? 0.0 : spec.scaling.center[d];
        const double h = spec.scaling.center.empty() ? 1.0 : spec.scaling.half_width[d];
        moments[d] = scaled_moments(process.components[d], n, x[d], spec.max_degree(d), c, h);
    }
    const int coords = spec.coords();
    std::vector<double> inv_vals;
    for (int c = p; c < coords; ++c) inv_vals.push_back(scaled(spec.scaling, c, i_next[c - p]));
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        const auto& t = spec.terms[k];
        double prod = 1.0;
        for (int d = 0; d < p; ++d) prod *= moments[d][t[d]];
        for (int c = p; c < coords; ++c) {
            for (int e = 0; e < t[c]; ++e) prod *= inv_vals[c - p];
        }
        out[static_cast<Eigen::Index>(k)] = prod;
    }
    return out;
}

double InventoryFunction::operator()(Vec i) const {
    double total = 0.0;
    if (!poly_coef_.empty()) {
        const Layout& layout = *layout_;
        double pw[8][16];
        for (int j = 0; j < inv_dim_; ++j) {
            const double v = layout.center.empty() ? i[j] : (i[j] - layout.center[j]) / layout.half_width[j];
            fill_powers(v, layout.max_power[j], pw[j]);
        }
        for (std::size_t g = 0; g < poly_coef_.size(); ++g) {
            double prod = poly_coef_[g];
            for (int j = 0; j < inv_dim_; ++j) prod *= pw[j][layout.powers[g][j]];
            total += prod;
        }
    }
    for (const auto& piece : pieces_) {
        bool inside = true;
        for (int j = 0; j < inv_dim_ && inside; ++j) inside = i[j] >= piece.lower[j] && i[j] < piece.upper[j];
        if (!inside) continue;
        total += piece.constant;
        for (int j = 0; j < inv_dim_; ++j) total += piece.slope[j] * i[j];
    }
    return total;
}

namespace {

// Exponent grouping is the same for every contraction with a given basis, so
// the last few layouts are kept per thread and matched on the basis content.
std::shared_ptr<const InventoryFunction::Layout> make_layout(const BasisSpec& spec) {
    thread_local std::array<std::shared_ptr<const InventoryFunction::Layout>, 4> cache;
    thread_local std::size_t next_slot = 0;
    for (const auto& entry : cache) {
        if (entry && entry->matches(spec)) return entry;
    }
    auto layout = std::make_shared<InventoryFunction::Layout>();
    const int p = spec.exo_dim;
    const int q = spec.kind == BasisKind::ExoOnly ? 0 : spec.inv_dim;
    if (q > 8) throw DimensionMismatch("inventory functions support at most 8 inventory dimensions");
    layout->kind = spec.kind;
    layout->exo_dim = spec.exo_dim;
    layout->inv_dim = spec.inv_dim;
    layout->terms = spec.terms;
    layout->scaling = spec.scaling;
    group_terms(spec, p, p + q, layout->group_of, layout->powers);
    if (!spec.scaling.center.empty()) {
        layout->center.assign(spec.scaling.center.begin() + p, spec.scaling.center.begin() + p + q);
        layout->half_width.assign(spec.scaling.half_width.begin() + p, spec.scaling.half_width.begin() + p + q);
    }
    layout->max_power.assign(q, 0);
    for (const auto& pw : layout->powers) {
        for (int j = 0; j < q; ++j) layout->max_power[j] = std::max(layout->max_power[j], pw[j]);
    }
    for (int m : layout->max_power) {
        if (m > 15) throw DimensionMismatch("inventory degree above 15");
    }
    for (int d = 0; d < p; ++d) {
        const int m = spec.max_degree(d);
        if (m > 15) throw DimensionMismatch("exogenous degree above 15");
        layout->max_exo_degree.push_back(m);
    }
    cache[next_slot] = layout;
    next_slot = (next_slot + 1) % cache.size();
    return layout;
}

// E[((X' - c) / h)^e | x], e = 0..max_degree.
void scaled_moments_into(const ProcessComponent& comp, int n, double x, int max_degree, double c, double h,
                         double* out) {
    double raw[16];
    conditional_poly_moments_into(comp, n, x, max_degree, raw);
    double neg_c[16];
    fill_powers(-c, max_degree, neg_c);
    double inv_h = 1.0;
    for (int e = 0; e <= max_degree; ++e) {
        double total = 0.0;
        for (int k = 0; k <= e; ++k) total += binomial(e, k) * raw[k] * neg_c[e - k];
        out[e] = total * inv_h;
        inv_h /= h;
    }
}

}  // namespace

InventoryFunction contract_conditional(const BasisSpec& spec, const ProcessSpec& process, int n, Vec x,
                                       const Eigen::VectorXd& alpha) {
    if (alpha.size() != spec.size()) throw DimensionMismatch("coefficient vector length differs from basis size");
    if (spec.kind == BasisKind::PolyWithControl) {
        throw UnsupportedMoment("conditional expectations are not defined for control-dependent bases");
    }
    InventoryFunction f;
    const int p = spec.exo_dim;
    if (spec.kind == BasisKind::HypercubeAffine) {
        const int q = spec.inv_dim;
        const int per = 1 + p + q;
        f.inv_dim_ = q;
        for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
            const auto& box = spec.boxes[b];
            std::vector<std::array<double, 2>> t(p);
            double e0 = 1.0;
            for (int d = 0; d < p; ++d) {
                const auto m =
                    conditional_truncated_moments(process.components[d], n, x[d], box.lower[d], box.upper[d], 1);
                t[d] = {m[0], m[1]};
                e0 *= m[0];
            }
            const std::size_t base = b * per;
            InventoryFunction::Piece piece;
            piece.lower.assign(box.lower.begin() + p, box.lower.end());
            piece.upper.assign(box.upper.begin() + p, box.upper.end());
            piece.constant = alpha[base] * e0;
            for (int d = 0; d < p; ++d) {
                double e = t[d][1];
                for (int d2 = 0; d2 < p; ++d2) {
                    if (d2 != d) e *= t[d2][0];
                }
                piece.constant += alpha[base + 1 + d] * e;
            }
            for (int j = 0; j < q; ++j) piece.slope.push_back(alpha[base + 1 + p + j] * e0);
            f.pieces_.push_back(std::move(piece));
        }
        return f;
    }
    if (static_cast<int>(x.size()) != p || process.dim() != p) throw DimensionMismatch("basis: exogenous dimension");
    f.layout_ = make_layout(spec);
    const auto& layout = *f.layout_;
    f.inv_dim_ = spec.kind == BasisKind::ExoOnly ? 0 : spec.inv_dim;
    double moments[8][16];
    if (p > 8) throw DimensionMismatch("conditional expectations support at most 8 exogenous dimensions");
    for (int d = 0; d < p; ++d) {
        const double c = spec.scaling.center.empty() ? 0.0 : spec.scaling.center[d];
        const double h = spec.scaling.center.empty() ? 1.0 : spec.scaling.half_width[d];
        scaled_moments_into(process.components[d], n, x[d], layout.max_exo_degree[d], c, h, moments[d]);
    }
    f.poly_coef_.assign(layout.powers.size(), 0.0);
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        double prod = alpha[static_cast<Eigen::Index>(k)];
        for (int d = 0; d < p; ++d) prod *= moments[d][spec.terms[k][d]];
        f.poly_coef_[layout.group_of[k]] += prod;
    }
    return f;
}

InventoryFunction contract_at(const BasisSpec& spec, Vec x, const Eigen::VectorXd& alpha) {
    if (alpha.size() != spec.size()) throw DimensionMismatch("coefficient vector length differs from basis size");
    if (spec.kind == BasisKind::PolyWithControl) throw DimensionMismatch("contract_at needs a basis without controls");
    if (static_cast<int>(x.size()) != spec.exo_dim) throw DimensionMismatch("basis: exogenous dimension");
    InventoryFunction f;
    const int p = spec.exo_dim;
    if (spec.kind == BasisKind::HypercubeAffine) {
        const int q = spec.inv_dim;
        const int per = 1 + p + q;
        f.inv_dim_ = q;
        for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
            const auto& box = spec.boxes[b];
            if (!in_box(box, 0, x)) continue;
            const std::size_t base = b * per;
            InventoryFunction::Piece piece;
            piece.lower.assign(box.lower.begin() + p, box.lower.end());
            piece.upper.assign(box.upper.begin() + p, box.upper.end());
            piece.constant = alpha[base];
            for (int d = 0; d < p; ++d) piece.constant += alpha[base + 1 + d] * x[d];
            for (int j = 0; j < q; ++j) piece.slope.push_back(alpha[base + 1 + p + j]);
            f.pieces_.push_back(std::move(piece));
        }
        return f;
    }
    f.layout_ = make_layout(spec);
    const auto& layout = *f.layout_;
    f.inv_dim_ = spec.kind == BasisKind::ExoOnly ? 0 : spec.inv_dim;
    f.poly_coef_.assign(layout.powers.size(), 0.0);
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        double prod = alpha[static_cast<Eigen::Index>(k)];
        for (int d = 0; d < p; ++d) prod *= std::pow(scaled(spec.scaling, d, x[d]), spec.terms[k][d]);
        f.poly_coef_[layout.group_of[k]] += prod;
    }
    return f;
}

double ControlFunction::operator()(Vec u) const {
    const std::size_t r = max_power_.size();
    double pw[8][16];
    for (std::size_t j = 0; j < r; ++j) {
        const double v = center_.empty() ? u[j] : (u[j] - center_[j]) / half_width_[j];
        fill_powers(v, max_power_[j], pw[j]);
    }
    double total = 0.0;
    for (std::size_t g = 0; g < coef_.size(); ++g) {
        double prod = coef_[g];
        for (std::size_t j = 0; j < r; ++j) prod *= pw[j][powers_[g][j]];
        total += prod;
    }
    return total;
}

ControlFunction contract_control(const BasisSpec& spec, Vec x, Vec i, const Eigen::VectorXd& alpha) {
    if (spec.kind != BasisKind::PolyWithControl) throw DimensionMismatch("contract_control needs PolyWithControl");
    if (alpha.size() != spec.size()) throw DimensionMismatch("coefficient vector length differs from basis size");
    std::vector<double> dummy_u(spec.control_dim, 0.0);
    check_dims(spec, x, i, dummy_u);
    const int p = spec.exo_dim;
    const int q = spec.inv_dim;
    const int r = spec.control_dim;
    if (r > 8) throw DimensionMismatch("control functions support at most 8 control dimensions");
    ControlFunction f;
    std::vector<int> group_of;
    group_terms(spec, p + q, p + q + r, group_of, f.powers_);
    f.coef_.assign(f.powers_.size(), 0.0);
    for (std::size_t k = 0; k < spec.terms.size(); ++k) {
        double prod = alpha[static_cast<Eigen::Index>(k)];
        const auto& t = spec.terms[k];
        for (int d = 0; d < p; ++d) prod *= std::pow(scaled(spec.scaling, d, x[d]), t[d]);
        for (int j = 0; j < q; ++j) prod *= std::pow(scaled(spec.scaling, p + j, i[j]), t[p + j]);
        f.coef_[group_of[k]] += prod;
    }
    if (!spec.scaling.center.empty()) {
        f.center_.assign(spec.scaling.center.begin() + p + q, spec.scaling.center.end());
        f.half_width_.assign(spec.scaling.half_width.begin() + p + q, spec.scaling.half_width.end());
    }
    f.max_power_.assign(r, 0);
    for (const auto& pw : f.powers_) {
        for (int j = 0; j < r; ++j) f.max_power_[j] = std::max(f.max_power_[j], pw[j]);
    }
    for (int m : f.max_power_) {
        if (m > 15) throw DimensionMismatch("control degree above 15");
    }
    return f;
}

}  // namespace invmc

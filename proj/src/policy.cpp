#include "invmc/policy.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "invmc/error.hpp"
#include "json_io.hpp"

namespace invmc {

using nlohmann::json;

namespace {

constexpr int kPolicyVersion = 1;

json bound_to_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

double bound_from_json(const json& j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::GridDiscretisation: return "GridDiscretisation";
        case Algorithm::ControlRandomisation: return "ControlRandomisation";
        case Algorithm::RegressLater: return "RegressLater";
        case Algorithm::Myopic: return "Myopic";
    }
    return "?";
}

std::string to_string(Mode m) { return m == Mode::ValueIteration ? "ValueIteration" : "PerformanceIteration"; }

Algorithm algorithm_from_string(const std::string& text) {
    if (text == "GridDiscretisation" || text == "GD") return Algorithm::GridDiscretisation;
    if (text == "ControlRandomisation" || text == "CR") return Algorithm::ControlRandomisation;
    if (text == "RegressLater" || text == "RL") return Algorithm::RegressLater;
    if (text == "Myopic" || text == "myopic") return Algorithm::Myopic;
    throw std::invalid_argument("unknown algorithm '" + text + "'");
}

Mode mode_from_string(const std::string& text) {
    if (text == "ValueIteration" || text == "value") return Mode::ValueIteration;
    if (text == "PerformanceIteration" || text == "performance") return Mode::PerformanceIteration;
    throw std::invalid_argument("unknown mode '" + text + "'");
}

std::vector<std::vector<double>> uniform_levels(const std::vector<double>& inv_max, int levels_per_dim) {
    if (levels_per_dim < 2) throw std::invalid_argument("grid discretisation needs at least 2 levels");
    std::vector<std::vector<double>> levels;
    for (double cap : inv_max) {
        std::vector<double> l(levels_per_dim);
        for (int k = 0; k < levels_per_dim; ++k) l[k] = cap * k / (levels_per_dim - 1);
        l.back() = cap;
        levels.push_back(std::move(l));
    }
    return levels;
}

double multilinear_interpolate(const std::vector<std::vector<double>>& levels, const double* values, Vec point) {
    return GridInterpolator(levels)(values, point);
}

GridInterpolator::GridInterpolator(const std::vector<std::vector<double>>& levels)
    : levels_(&levels), q_(static_cast<int>(levels.size())) {
    if (q_ > kMaxDim) throw DimensionMismatch("interpolation grid has too many dimensions");
    std::size_t s = 1;
    for (int d = 0; d < q_; ++d) {
        const auto& l = levels[d];
        if (l.empty()) throw std::invalid_argument("interpolation grid has an empty dimension");
        stride_[d] = s;
        s *= l.size();
        last_[d] = static_cast<int>(l.size()) - 1;
        data_[d] = l.data();
        lo_[d] = l.front();
        if (last_[d] > 0) {
            const double step = (l.back() - l.front()) / last_[d];
            bool even = step > 0.0;
            for (int j = 0; j <= last_[d] && even; ++j) {
                even = std::abs(l[j] - (l.front() + j * step)) <= 1e-12 * std::max(1.0, std::abs(l.back()));
            }
            even_[d] = even;
            inv_step_[d] = even ? 1.0 / step : 0.0;
        }
    }
}

void GridInterpolator::locate(int d, double v, int& cell, double& weight) const {
    const double* l = data_[d];
    const int last = last_[d];
    v = std::clamp(v, l[0], l[last]);
    int j;
    if (even_[d]) {
        j = static_cast<int>((v - lo_[d]) * inv_step_[d]);
        // Rounding can put v just outside the computed cell.
        if (j > 0 && v < l[j]) --j;
        if (j < last && v >= l[j + 1]) ++j;
    } else {
        j = static_cast<int>(std::upper_bound(l, l + last + 1, v) - l) - 1;
    }
    j = std::clamp(j, 0, last - 1);
    cell = j;
    const double width = l[j + 1] - l[j];
    weight = width > 0.0 ? (v - l[j]) / width : 0.0;
}

double GridInterpolator::operator()(const double* values, Vec point) const {
    int cell[kMaxDim];
    double weight[kMaxDim];
    bool flat = false;
    for (int d = 0; d < q_; ++d) {
        if (last_[d] == 0) {
            cell[d] = 0;
            weight[d] = 0.0;
            flat = true;
        } else {
            locate(d, point[d], cell[d], weight[d]);
        }
    }
    if (!flat && q_ == 1) return (1.0 - weight[0]) * values[cell[0]] + weight[0] * values[cell[0] + 1];
    if (!flat && q_ == 2) {
        const double* v = values + cell[0] + cell[1] * stride_[1];
        const double lower = (1.0 - weight[0]) * v[0] + weight[0] * v[1];
        const double upper = (1.0 - weight[0]) * v[stride_[1]] + weight[0] * v[stride_[1] + 1];
        return (1.0 - weight[1]) * lower + weight[1] * upper;
    }
    double total = 0.0;
    for (int corner = 0; corner < (1 << q_); ++corner) {
        double w = 1.0;
        std::size_t index = 0;
        for (int d = 0; d < q_; ++d) {
            const bool upper = (corner >> d) & 1;
            if (upper && last_[d] == 0) {
                w = 0.0;
                break;
            }
            w *= upper ? weight[d] : 1.0 - weight[d];
            index += (cell[d] + (upper ? 1 : 0)) * stride_[d];
        }
        if (w != 0.0) total += w * values[index];
    }
    return total;
}

ArgmaxResult Policy::decide(const ControlProblem& problem, int n, Vec x, Vec i) const {
    return at(n, x).decide(problem, i);
}

Policy::StepRule Policy::at(int n, Vec x) const {
    if (n < 0 || n >= horizon) throw std::out_of_range("decision step outside the horizon");
    StepRule rule;
    rule.policy_ = this;
    rule.n_ = n;
    rule.x_.assign(x.begin(), x.end());
    if (algorithm == Algorithm::RegressLater) {
        rule.continuation_ = contract_conditional(basis, process, n, x, coefficients.row(n).transpose());
    } else if (algorithm == Algorithm::GridDiscretisation) {
        rule.at_levels_ = level_coefficients[n].transpose() * eval_basis(basis, x, {});
        rule.grid_.emplace(levels);
    }
    return rule;
}

ArgmaxResult Policy::StepRule::decide(const ControlProblem& problem, Vec i) const {
    const Policy& p = *policy_;
    const Vec x(x_);
    switch (p.algorithm) {
        case Algorithm::Myopic:
            return argmax_control(problem, n_, x, i, [](Vec, Vec) { return 0.0; }, p.argmax);
        case Algorithm::RegressLater:
            return argmax_control(problem, n_, x, i, [&](Vec, Vec next) { return continuation_(next); }, p.argmax);
        case Algorithm::ControlRandomisation: {
            const ControlFunction cont = contract_control(p.basis, x, i, p.coefficients.row(n_).transpose());
            return argmax_control(problem, n_, x, i, [&](Vec u, Vec) { return cont(u); }, p.argmax);
        }
        case Algorithm::GridDiscretisation:
            return argmax_control(
                problem, n_, x, i,
                [&](Vec, Vec next) { return (*grid_)(at_levels_.data(), next); }, p.argmax);
    }
    throw std::logic_error("unknown algorithm");
}

Policy myopic_policy(const ControlProblem& problem, const ArgmaxOptions& argmax) {
    Policy p;
    p.algorithm = Algorithm::Myopic;
    p.horizon = problem.horizon();
    p.fingerprint = problem.fingerprint();
    p.problem_name = problem.name();
    p.argmax = argmax;
    p.basis = exo_only(problem.exo_dim(), {std::vector<int>(problem.exo_dim(), 0)});
    return p;
}

json basis_to_json(const BasisSpec& spec) {
    json j;
    j["kind"] = to_string(spec.kind);
    j["exo_dim"] = spec.exo_dim;
    j["inv_dim"] = spec.inv_dim;
    j["control_dim"] = spec.control_dim;
    if (spec.kind == BasisKind::HypercubeAffine) {
        json boxes = json::array();
        for (const auto& b : spec.boxes) {
            json lo = json::array(), hi = json::array();
            for (double v : b.lower) lo.push_back(bound_to_json(v));
            for (double v : b.upper) hi.push_back(bound_to_json(v));
            boxes.push_back({{"lower", lo}, {"upper", hi}});
        }
        j["boxes"] = boxes;
    } else {
        j["terms"] = spec.terms;
    }
    j["scaling"] = {{"center", spec.scaling.center}, {"half_width", spec.scaling.half_width}};
    j["auto_scale"] = spec.auto_scale;
    return j;
}

BasisSpec basis_from_json(const json& j) {
    BasisSpec s;
    s.kind = basis_kind_from_string(j.at("kind").get<std::string>());
    s.exo_dim = j.at("exo_dim").get<int>();
    s.inv_dim = j.value("inv_dim", s.kind == BasisKind::ExoOnly ? 0 : 1);
    s.control_dim = j.value("control_dim", 0);
    if (s.kind == BasisKind::HypercubeAffine) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        for (const auto& b : j.at("boxes")) {
            HyperBox box;
            for (const auto& v : b.at("lower")) box.lower.push_back(bound_from_json(v, -inf));
            for (const auto& v : b.at("upper")) box.upper.push_back(bound_from_json(v, inf));
            s.boxes.push_back(std::move(box));
        }
    } else {
        s.terms = j.at("terms").get<std::vector<std::vector<int>>>();
    }
    if (j.contains("scaling")) {
        s.scaling.center = j["scaling"].value("center", std::vector<double>{});
        s.scaling.half_width = j["scaling"].value("half_width", std::vector<double>{});
    }
    s.auto_scale = j.value("auto_scale", false);
    validate(s);
    return s;
}

json process_to_json(const ProcessSpec& spec) {
    json out = json::array();
    for (const auto& c : spec.components) {
        if (const auto* p = std::get_if<Ar1Euler>(&c)) {
            out.push_back({{"type", "Ar1Euler"}, {"alpha", p->alpha}, {"mu", p->mu}, {"sigma", p->sigma}});
        } else if (const auto* p = std::get_if<JumpPrice>(&c)) {
            out.push_back({{"type", "JumpPrice"},
                           {"rate", p->rate},
                           {"level", p->level},
                           {"vol", p->vol},
                           {"jump_prob", p->jump_prob},
                           {"jump_sd", p->jump_sd}});
        } else if (const auto* p = std::get_if<SquaredAr1Wind>(&c)) {
            out.push_back({{"type", "SquaredAr1Wind"}, {"coef", p->coef}, {"noise", p->noise}, {"offset", p->offset}});
        } else if (const auto* p = std::get_if<SeasonalAr1Temp>(&c)) {
            out.push_back({{"type", "SeasonalAr1Temp"}, {"coef", p->coef}, {"noise", p->noise}});
        } else if (const auto* p = std::get_if<FiniteChain>(&c)) {
            out.push_back({{"type", "FiniteChain"}, {"states", p->states}, {"transition", p->transition}});
        } else {
            out.push_back({{"type", "CustomStep"}});
        }
    }
    return out;
}

ProcessSpec process_from_json(const json& j) {
    ProcessSpec spec;
    for (const auto& c : j) {
        const auto type = c.at("type").get<std::string>();
        if (type == "Ar1Euler") {
            spec.components.push_back(
                Ar1Euler{c.at("alpha").get<double>(), c.at("mu").get<double>(), c.at("sigma").get<double>()});
        } else if (type == "JumpPrice") {
            JumpPrice p;
            p.rate = c.value("rate", p.rate);
            p.level = c.value("level", p.level);
            p.vol = c.value("vol", p.vol);
            p.jump_prob = c.value("jump_prob", p.jump_prob);
            p.jump_sd = c.value("jump_sd", p.jump_sd);
            spec.components.push_back(p);
        } else if (type == "SquaredAr1Wind") {
            SquaredAr1Wind p;
            p.coef = c.value("coef", p.coef);
            p.noise = c.value("noise", p.noise);
            p.offset = c.value("offset", p.offset);
            spec.components.push_back(p);
        } else if (type == "SeasonalAr1Temp") {
            SeasonalAr1Temp p;
            p.coef = c.value("coef", p.coef);
            p.noise = c.value("noise", p.noise);
            spec.components.push_back(p);
        } else if (type == "FiniteChain") {
            spec.components.push_back(FiniteChain{c.at("states").get<std::vector<double>>(),
                                                  c.at("transition").get<std::vector<double>>()});
        } else if (type == "CustomStep") {
            // The step function cannot be serialised; decisions never call it.
            spec.components.push_back(CustomStep{[](int, double, double, double) -> double {
                throw UnsupportedMoment("custom process step was not restored from file");
            }});
        } else {
            throw std::invalid_argument("unknown process component '" + type + "'");
        }
    }
    return spec;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    Eigen::MatrixXd m(rows, cols);
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw DimensionMismatch("matrix row count");
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(data[r].size()) != cols) throw DimensionMismatch("matrix column count");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r][c].get<double>();
    }
    return m;
}

std::string policy_to_json(const Policy& policy) {
    json j;
    j["format"] = "invmc-policy";
    j["version"] = kPolicyVersion;
    j["algorithm"] = to_string(policy.algorithm);
    j["mode"] = to_string(policy.mode);
    j["horizon"] = policy.horizon;
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016" PRIx64, policy.fingerprint);
    j["fingerprint"] = fp;
    j["problem"] = policy.problem_name;
    j["basis"] = basis_to_json(policy.basis);
    j["process"] = process_to_json(policy.process);
    j["coefficients"] = matrix_to_json(policy.coefficients);
    j["levels"] = policy.levels;
    json lc = json::array();
    for (const auto& m : policy.level_coefficients) lc.push_back(matrix_to_json(m));
    j["level_coefficients"] = lc;
    j["argmax"] = {{"resolution", policy.argmax.resolution},
                   {"refine_iterations", policy.argmax.refine_iterations},
                   {"tie_tolerance", policy.argmax.tie_tolerance}};
    return j.dump(1);
}

Policy policy_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.value("format", "") != "invmc-policy") throw std::invalid_argument("not an invmc policy file");
    if (j.at("version").get<int>() != kPolicyVersion) throw std::invalid_argument("unsupported policy version");
    Policy p;
    p.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    p.mode = mode_from_string(j.at("mode").get<std::string>());
    p.horizon = j.at("horizon").get<int>();
    p.fingerprint = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
    p.problem_name = j.value("problem", "");
    p.basis = basis_from_json(j.at("basis"));
    p.process = process_from_json(j.at("process"));
    p.coefficients = matrix_from_json(j.at("coefficients"));
    p.levels = j.at("levels").get<std::vector<std::vector<double>>>();
    for (const auto& m : j.at("level_coefficients")) p.level_coefficients.push_back(matrix_from_json(m));
    const auto& a = j.at("argmax");
    p.argmax.resolution = a.at("resolution").get<int>();
    p.argmax.refine_iterations = a.at("refine_iterations").get<int>();
    p.argmax.tie_tolerance = a.at("tie_tolerance").get<double>();
    return p;
}

void save_policy(const Policy& policy, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file + " for writing");
    out << policy_to_json(policy) << '\n';
}

Policy load_policy(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::stringstream buf;
    buf << in.rdbuf();
    return policy_from_json(buf.str());
}

}  // namespace invmc

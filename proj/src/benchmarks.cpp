#include "invmc/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "invmc/error.hpp"

namespace invmc {

using nlohmann::json;

namespace {

constexpr double kControlBound = 1e3;

template <class T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("override '" + key + "' has the wrong type");
    }
}

json parse_overrides(const std::string& text) {
    json j;
    try {
        j = json::parse(text.empty() ? std::string("{}") : text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("benchmark overrides are not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("benchmark overrides must be a JSON object");
    return j;
}

[[noreturn]] void unknown_key(const std::string& bench, const std::string& key) {
    throw ConfigError("unknown override '" + key + "' for benchmark '" + bench + "'");
}

std::string descriptor_of(const json& params) { return params.dump(); }

std::vector<std::vector<int>> terms_from(std::initializer_list<std::vector<int>> list) { return {list}; }

// Root of demand(T) = target nearest to the daily mean, or the closest approach.
double temperature_for_demand(const DemandPoly& demand, double target) {
    constexpr double kLo = -40.0;
    constexpr double kHi = 60.0;
    constexpr int kSteps = 10000;
    const double h = (kHi - kLo) / kSteps;
    double best_t = 0.0;
    double best_gap = INFINITY;
    double root = NAN;
    double prev = demand.demand(kLo) - target;
    for (int k = 1; k <= kSteps; ++k) {
        const double t = kLo + k * h;
        const double cur = demand.demand(t) - target;
        if (std::abs(cur) < best_gap) {
            best_gap = std::abs(cur);
            best_t = t;
        }
        if ((prev <= 0.0) != (cur <= 0.0)) {
            double a = t - h;
            double b = t;
            double fa = prev;
            for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = demand.demand(mid) - target;
                if ((fa <= 0.0) == (fm <= 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            const double r = 0.5 * (a + b);
            if (std::isnan(root) || std::abs(r) < std::abs(root)) root = r;
        }
        prev = cur;
    }
    return std::isnan(root) ? best_t : root;
}

}  // namespace

int ArbitrageParams::steps() const { return static_cast<int>(std::lround(1.0 / dt)); }

double BatteryParams::wind_energy(Vec x) const {
    const double s = x[0] + wind.offset;
    return wind_map.energy(s * s);
}

double BatteryParams::temperature_at(int n, Vec x) const { return x[1] + daily.at(n); }

double BatteryParams::demand_at(int n, Vec x) const { return demand.demand(temperature_at(n, x)); }

double BatteryParams::price_at(int n, Vec x) const { return std::exp(x[2]) - price_shift + weekly.at(n); }

Interval BatteryRegion::grid_to_battery(double gd) const {
    // Net battery flow = gb + wind_to_battery - (residual - gd).
    const double shift = -wind_to_battery + residual - gd;
    return {net_flow.lo + shift, net_flow.hi + shift};
}

BatteryRegion battery_admissible_region(double d, double w, double i, double capacity, double rate) {
    BatteryRegion r;
    r.wind_to_demand = std::min(w, d);
    r.wind_to_battery = w - r.wind_to_demand;
    r.residual = d - r.wind_to_demand;
    r.grid_to_demand = {std::max(0.0, r.residual - rate), r.residual};
    r.net_flow = {std::max(-rate, -i), std::min(rate, capacity - i)};
    return r;
}

bool battery_constraints_hold(double d, double w, double i, double gb, double gd, double capacity, double rate,
                              double tol) {
    const double wd = std::min(w, d);
    const double wb = w - wd;
    const double bd = d - wd - gd;
    const double net = gb + wb - bd;
    const bool demand_met = std::abs(gd + wd + bd - d) <= tol;
    const bool wind_used = std::abs(wb + wd - w) <= tol && wd >= -tol && wb >= -tol;
    const bool grid_sign = gd >= -tol;
    const bool discharge = bd >= -tol && bd <= rate + tol;
    const bool window = net >= std::max(-rate, -i) - tol && net <= std::min(rate, capacity - i) + tol;
    return demand_met && wind_used && grid_sign && discharge && window;
}

SolverConfig BenchmarkBundle::config(Algorithm algorithm, Mode mode) const {
    SolverConfig c;
    c.algorithm = algorithm;
    c.mode = mode;
    c.process = process;
    c.argmax = argmax;
    c.grid_levels = grid_levels;
    switch (algorithm) {
        case Algorithm::GridDiscretisation: c.basis = gd_basis; break;
        case Algorithm::ControlRandomisation: c.basis = cr_basis; break;
        default: c.basis = rl_basis; break;
    }
    return c;
}

std::vector<std::string> benchmark_names() { return {"arbitrage", "hydro", "battery"}; }

BenchmarkBundle make_arbitrage(const ArbitrageParams& p) {
    if (!(p.dt > 0.0) || std::abs(p.steps() * p.dt - 1.0) > 1e-9) throw ConfigError("arbitrage: 1/dt must be an integer");
    if (!(p.inv_max > 0.0)) throw ConfigError("arbitrage: inv_max must be positive");
    const json desc = {{"dt", p.dt},         {"reversion", p.reversion},         {"mean", p.mean},
                       {"volatility", p.volatility}, {"control", p.control}, {"switching_cost", p.switching_cost},
                       {"terminal_weight", p.terminal_weight}, {"inv_max", p.inv_max}};
    ProblemDefinition def;
    def.name = "arbitrage";
    def.descriptor = descriptor_of(desc);
    def.horizon = p.steps();
    def.exo_dim = 1;
    def.inv_dim = 1;
    def.inv_max = {p.inv_max};
    def.controls = FiniteControls{{{-p.control}, {0.0}, {p.control}}};
    def.additive = AdditiveTransition{{p.dt}, {0.0}};
    const double dt = p.dt;
    const double cost = p.switching_cost;
    const double weight = p.terminal_weight;
    def.running_reward = [dt, cost](int, Vec x, Vec, Vec u) {
        const double rho = u[0] != 0.0 ? cost : 0.0;
        return -(u[0] + rho) * x[0] * dt;
    };
    def.terminal_reward = [weight](Vec x, Vec i) { return weight * x[0] * i[0]; };

    BenchmarkBundle b;
    b.name = "arbitrage";
    b.problem = std::make_shared<const ControlProblem>(std::move(def));
    b.process.components = {Ar1Euler{p.reversion * p.dt, p.mean, p.volatility * std::sqrt(p.dt)}};
    b.x0 = {p.x0};
    b.i0 = {p.i0};
    // Exponents over (x, i) and (x, i, u).
    b.rl_basis = poly_product(1, 1, terms_from({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}, {2, 1}, {2, 2}}));
    b.cr_basis = poly_with_control(1, 1, 1, total_degree_terms(3, 2));
    b.gd_basis = exo_only(1, terms_from({{0}, {1}, {2}}));
    for (BasisSpec* s : {&b.rl_basis, &b.cr_basis, &b.gd_basis}) s->auto_scale = true;
    b.grid_levels = 21;
    return b;
}

BenchmarkBundle make_hydro(const HydroParams& p) {
    if (p.capacity.size() != 2 || p.i0.size() != 2) throw ConfigError("hydro: capacity and i0 need two entries");
    if (p.steps < 1) throw ConfigError("hydro: steps must be positive");
    const json desc = {{"reversion", p.reversion}, {"mean", p.mean},         {"sigma", p.sigma},
                       {"steps", p.steps},         {"inflow", p.inflow},     {"link_max", p.link_max},
                       {"river_max", p.river_max}, {"capacity", p.capacity}, {"target", p.target},
                       {"penalty", p.penalty},
                       {"reward_variant", p.reward_variant == HydroRewardVariant::Revenue ? "revenue" : "paper-sign"}};
    ProblemDefinition def;
    def.name = "hydro";
    def.descriptor = descriptor_of(desc);
    def.horizon = p.steps;
    def.exo_dim = 1;
    def.inv_dim = 2;
    def.inv_max = p.capacity;
    def.controls = BoxControls{{-p.link_max, 0.0}, {p.link_max, p.river_max}};
    const double inflow = p.inflow;
    const double link = p.link_max;
    const double river = p.river_max;
    const double c1 = p.capacity[0];
    const double c2 = p.capacity[1];
    // u[0]: flow into reservoir 1 from reservoir 2 (negative: turbine to reservoir 2); u[1]: release to the river.
    def.transition = [inflow](int, Vec, Vec u, Vec i, MutVec next) {
        next[0] = i[0] + u[0] + inflow;
        next[1] = i[1] - u[0] - u[1];
    };
    def.feasible_range = [=](int, Vec, Vec i, int dim, Vec u) -> Interval {
        if (dim == 0) {
            return {std::max({-link, -i[0] - inflow, i[1] - c2 - river}), std::min({link, c1 - i[0] - inflow, i[1]})};
        }
        return {std::max(0.0, i[1] - u[0] - c2), std::min(river, i[1] - u[0])};
    };
    def.range_order = {0, 1};
    if (p.reward_variant == HydroRewardVariant::Revenue) {
        def.running_reward = [](int, Vec x, Vec, Vec u) { return x[0] * (u[1] - u[0]); };
    } else {
        def.running_reward = [](int, Vec x, Vec, Vec u) { return -x[0] * (u[0] + u[1]); };
    }
    const double a = p.penalty;
    const double target = p.target;
    def.terminal_reward = [a, target](Vec, Vec i) {
        const double gap = i[0] + i[1] - target;
        return -a * gap * gap;
    };

    BenchmarkBundle b;
    b.name = "hydro";
    b.problem = std::make_shared<const ControlProblem>(std::move(def));
    b.process.components = {Ar1Euler{p.reversion, p.mean, p.sigma}};
    b.x0 = {p.x0};
    b.i0 = p.i0;
    b.rl_basis = poly_product(1, 2, product_terms(total_degree_terms(1, 2), total_degree_terms(2, 2)));
    b.cr_basis = poly_with_control(1, 2, 2, total_degree_terms(5, 2));
    b.gd_basis = exo_only(1, terms_from({{0}, {1}, {2}}));
    for (BasisSpec* s : {&b.rl_basis, &b.cr_basis, &b.gd_basis}) s->auto_scale = true;
    b.grid_levels = 7;
    b.argmax.resolution = 5;
    b.argmax.refine_iterations = 8;
    return b;
}

BenchmarkBundle make_battery(const BatteryParams& params) {
    BatteryParams p = params;
    if (p.steps < 1) throw ConfigError("battery: steps must be positive");
    if (p.capacity < 0.0 || !(p.rate > 0.0)) throw ConfigError("battery: capacity must be >= 0 and rate > 0");
    if (p.wind_mean_energy > 0.0) p.wind.offset = calibrate_wind_offset(p.wind, p.wind_map, p.wind_mean_energy);

    const json desc = {
        {"steps", p.steps},
        {"capacity", p.capacity},
        {"rate", p.rate},
        {"surcharge", p.surcharge},
        {"wind", {p.wind.coef, p.wind.noise, p.wind.offset}},
        {"temperature", {p.temperature.coef, p.temperature.noise}},
        {"price", {p.price.rate, p.price.level, p.price.vol, p.price.jump_prob, p.price.jump_sd}},
        {"wind_variant", p.wind_map.variant == WindPowerVariant::RatedCapped ? "rated-capped" : "as-written"},
        {"demand", p.demand.coefficients},
        {"daily", {p.daily.amplitude, p.daily.period, p.daily.table}},
        {"weekly", {p.weekly.amplitude, p.weekly.period, p.weekly.table}},
        {"price_shift", p.price_shift}};

    const auto shared = std::make_shared<const BatteryParams>(p);
    ProblemDefinition def;
    def.name = "battery";
    def.descriptor = descriptor_of(desc);
    def.horizon = p.steps;
    def.exo_dim = 3;
    def.inv_dim = 1;
    def.inv_max = {p.capacity};
    // u[0]: grid to battery, u[1]: grid to demand.
    def.controls = BoxControls{{-kControlBound, 0.0}, {kControlBound, kControlBound}};
    def.transition = [shared](int n, Vec x, Vec u, Vec i, MutVec next) {
        const double w = shared->wind_energy(x);
        const double d = shared->demand_at(n, x);
        const double wd = std::min(w, d);
        next[0] = i[0] + u[0] + (w - wd) - (d - wd - u[1]);
    };
    def.feasible_range = [shared](int n, Vec x, Vec i, int dim, Vec u) -> Interval {
        const BatteryRegion r = battery_admissible_region(shared->demand_at(n, x), shared->wind_energy(x), i[0],
                                                          shared->capacity, shared->rate);
        return dim == 1 ? r.grid_to_demand : r.grid_to_battery(u[1]);
    };
    def.range_order = {1, 0};
    def.running_reward = [shared](int n, Vec x, Vec, Vec u) {
        const double price = shared->price_at(n, x);
        return price * shared->demand_at(n, x) - shared->surcharge * price * (u[0] + u[1]);
    };
    def.terminal_reward = [](Vec, Vec) { return 0.0; };
    def.constraint_check = [shared](int n, Vec x, Vec i, Vec u) {
        return battery_constraints_hold(shared->demand_at(n, x), shared->wind_energy(x), i[0], u[0], u[1],
                                        shared->capacity, shared->rate);
    };

    BenchmarkBundle b;
    b.name = "battery";
    b.problem = std::make_shared<const ControlProblem>(std::move(def));
    b.process.components = {p.wind, p.temperature, p.price};
    // Initial state from observed (demand, wind energy, price); zero wind energy means zero speed.
    const double k = 1e-6 * p.wind_map.cp * p.wind_map.air_density * p.wind_map.swept_area;
    const double speed = std::min(std::cbrt(std::max(0.0, p.w0) / k), p.wind_map.rated_speed);
    const double y0 = std::sqrt(speed) - p.wind.offset;
    const double t0 = temperature_for_demand(p.demand, p.d0) - p.daily.at(0);
    const double price_arg = p.p0 + p.price_shift - p.weekly.at(0);
    if (!(price_arg > 0.0)) throw ConfigError("battery: initial price is below the attainable range");
    b.x0 = {y0, t0, std::log(price_arg)};
    b.i0 = {std::min(p.i0, p.capacity)};
    // Exponents over (y, T, Y, i).
    b.rl_basis = poly_product(3, 1,
                              terms_from({{0, 0, 0, 0},
                                          {1, 0, 0, 0},
                                          {0, 1, 0, 0},
                                          {0, 0, 1, 0},
                                          {2, 0, 0, 0},
                                          {0, 2, 0, 0},
                                          {0, 0, 2, 0},
                                          {0, 0, 0, 1},
                                          {1, 0, 0, 1},
                                          {0, 1, 0, 1},
                                          {0, 0, 1, 1},
                                          {0, 0, 0, 2}}));
    b.cr_basis = poly_with_control(3, 1, 2, total_degree_terms(6, 2));
    b.gd_basis = exo_only(3, total_degree_terms(3, 2));
    for (BasisSpec* s : {&b.rl_basis, &b.cr_basis, &b.gd_basis}) s->auto_scale = true;
    b.grid_levels = 11;
    b.argmax.resolution = 11;
    b.argmax.refine_iterations = 20;
    return b;
}

BenchmarkBundle build_benchmark(const std::string& name, const std::string& overrides_json) {
    const json o = parse_overrides(overrides_json);
    if (name == "arbitrage") {
        ArbitrageParams p;
        for (const auto& [key, v] : o.items()) {
            if (key == "dt") p.dt = get_as<double>(v, key);
            else if (key == "reversion") p.reversion = get_as<double>(v, key);
            else if (key == "mean") p.mean = get_as<double>(v, key);
            else if (key == "volatility") p.volatility = get_as<double>(v, key);
            else if (key == "control") p.control = get_as<double>(v, key);
            else if (key == "switching_cost") p.switching_cost = get_as<double>(v, key);
            else if (key == "terminal_weight") p.terminal_weight = get_as<double>(v, key);
            else if (key == "inv_max") p.inv_max = get_as<double>(v, key);
            else if (key == "x0") p.x0 = get_as<double>(v, key);
            else if (key == "i0") p.i0 = get_as<double>(v, key);
            else unknown_key(name, key);
        }
        return make_arbitrage(p);
    }
    if (name == "hydro") {
        HydroParams p;
        for (const auto& [key, v] : o.items()) {
            if (key == "reversion") p.reversion = get_as<double>(v, key);
            else if (key == "mean") p.mean = get_as<double>(v, key);
            else if (key == "sigma") p.sigma = get_as<double>(v, key);
            else if (key == "steps") p.steps = get_as<int>(v, key);
            else if (key == "inflow") p.inflow = get_as<double>(v, key);
            else if (key == "link_max") p.link_max = get_as<double>(v, key);
            else if (key == "river_max") p.river_max = get_as<double>(v, key);
            else if (key == "capacity") p.capacity = get_as<std::vector<double>>(v, key);
            else if (key == "target") p.target = get_as<double>(v, key);
            else if (key == "penalty") p.penalty = get_as<double>(v, key);
            else if (key == "x0") p.x0 = get_as<double>(v, key);
            else if (key == "i0") p.i0 = get_as<std::vector<double>>(v, key);
            else if (key == "reward_variant") {
                const auto s = get_as<std::string>(v, key);
                if (s == "revenue") p.reward_variant = HydroRewardVariant::Revenue;
                else if (s == "paper-sign") p.reward_variant = HydroRewardVariant::PaperSign;
                else throw ConfigError("hydro: reward_variant must be 'revenue' or 'paper-sign'");
            } else unknown_key(name, key);
        }
        return make_hydro(p);
    }
    if (name == "battery") {
        BatteryParams p;
        for (const auto& [key, v] : o.items()) {
            if (key == "steps") p.steps = get_as<int>(v, key);
            else if (key == "capacity") p.capacity = get_as<double>(v, key);
            else if (key == "rate") p.rate = get_as<double>(v, key);
            else if (key == "surcharge") p.surcharge = get_as<double>(v, key);
            else if (key == "wind_offset") {
                p.wind.offset = get_as<double>(v, key);
                p.wind_mean_energy = 0.0;
            } else if (key == "wind_mean_energy") p.wind_mean_energy = get_as<double>(v, key);
            else if (key == "wind_variant") {
                const auto s = get_as<std::string>(v, key);
                if (s == "rated-capped") p.wind_map.variant = WindPowerVariant::RatedCapped;
                else if (s == "as-written") p.wind_map.variant = WindPowerVariant::AsWritten;
                else throw ConfigError("battery: wind_variant must be 'rated-capped' or 'as-written'");
            } else if (key == "daily_amplitude") p.daily.amplitude = get_as<double>(v, key);
            else if (key == "weekly_amplitude") p.weekly.amplitude = get_as<double>(v, key);
            else if (key == "daily_table") p.daily.table = get_as<std::vector<double>>(v, key);
            else if (key == "weekly_table") p.weekly.table = get_as<std::vector<double>>(v, key);
            else if (key == "price_shift") p.price_shift = get_as<double>(v, key);
            else if (key == "d0") p.d0 = get_as<double>(v, key);
            else if (key == "w0") p.w0 = get_as<double>(v, key);
            else if (key == "p0") p.p0 = get_as<double>(v, key);
            else if (key == "i0") p.i0 = get_as<double>(v, key);
            else unknown_key(name, key);
        }
        return make_battery(p);
    }
    throw UnknownBenchmark("unknown benchmark '" + name + "' (known: arbitrage, hydro, battery)");
}

}  // namespace invmc

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "invmc/basis.hpp"
#include "invmc/model.hpp"
#include "invmc/processes.hpp"
#include "invmc/solvers.hpp"

namespace invmc {

/// Storage trading against a mean-reverting price; three controls (buy, hold, sell).
struct ArbitrageParams {
    double dt = 1.0 / 200.0;
    double reversion = 2.0;
    double mean = 5.0;
    double volatility = 5.0;
    double control = 11.5;
    double switching_cost = 2.0;
    double terminal_weight = 0.5;
    double inv_max = 1.0;
    double x0 = 5.0;
    double i0 = 0.5;
    int steps() const;
};

enum class HydroRewardVariant { Revenue, PaperSign };

/// Two reservoirs in series: inflow into reservoir 1, pump/turbine between
/// them, turbines from reservoir 2 to the river.
struct HydroParams {
    double reversion = 0.1;
    double mean = 40.0;
    double sigma = 1.0;
    int steps = 360;
    double inflow = 0.12;
    double link_max = 0.6;
    double river_max = 1.2;
    std::vector<double> capacity{2.0, 1.0};
    double target = 1.5;
    double penalty = 1200.0;
    HydroRewardVariant reward_variant = HydroRewardVariant::Revenue;
    double x0 = 40.0;
    std::vector<double> i0{1.0, 0.5};
};

/// Wind turbine, residential demand, battery and grid connection.
/// Exogenous coordinates: (centred root wind speed y, deseasonalised
/// temperature, log-price state Y). Controls: (grid-to-battery, grid-to-demand).
struct BatteryParams {
    int steps = 336;
    double capacity = 20.0;
    double rate = 2.1;
    double surcharge = 1.1;
    SquaredAr1Wind wind;
    SeasonalAr1Temp temperature;
    JumpPrice price;
    WindPowerMap wind_map;
    DemandPoly demand;
    SeasonalProfile daily{5.0, 24, {}};
    SeasonalProfile weekly{5.0, 168, {}};
    double price_shift = 27.2531;
    /// Stationary mean hourly wind energy used to calibrate wind.offset (<= 0 keeps the offset).
    double wind_mean_energy = 0.35;
    /// Initial observations (demand, wind energy, price, charge).
    double d0 = 0.15;
    double w0 = 0.0;
    double p0 = 35.0;
    double i0 = 10.0;

    double wind_energy(Vec x) const;
    double temperature_at(int n, Vec x) const;
    double demand_at(int n, Vec x) const;
    double price_at(int n, Vec x) const;
};

/// Feasible (grid-to-battery, grid-to-demand) set at given demand, wind energy and charge.
struct BatteryRegion {
    double wind_to_demand = 0.0;
    double wind_to_battery = 0.0;
    /// Demand left after wind: d - min(w, d).
    double residual = 0.0;
    Interval grid_to_demand;
    /// Window for the net battery flow.
    Interval net_flow;
    /// Feasible grid-to-battery interval given grid-to-demand.
    Interval grid_to_battery(double gd) const;
};

BatteryRegion battery_admissible_region(double d, double w, double i, double capacity = 20.0, double rate = 2.1);

/// All flow constraints (demand balance, wind use, sign and rate limits, charge window).
bool battery_constraints_hold(double d, double w, double i, double gb, double gd, double capacity = 20.0,
                              double rate = 2.1, double tol = 1e-9);

struct BenchmarkBundle {
    std::string name;
    std::shared_ptr<const ControlProblem> problem;
    ProcessSpec process;
    std::vector<double> x0;
    std::vector<double> i0;
    BasisSpec rl_basis;
    BasisSpec cr_basis;
    BasisSpec gd_basis;
    int grid_levels = 0;
    ArgmaxOptions argmax;

    /// Solver defaults for an algorithm and mode (basis, process, argmax, grid levels).
    SolverConfig config(Algorithm algorithm, Mode mode) const;
};

std::vector<std::string> benchmark_names();

/// Overrides are a JSON object of parameter values; unknown keys raise ConfigError.
BenchmarkBundle build_benchmark(const std::string& name, const std::string& overrides_json = "{}");

BenchmarkBundle make_arbitrage(const ArbitrageParams& params);
BenchmarkBundle make_hydro(const HydroParams& params);
BenchmarkBundle make_battery(const BatteryParams& params);

}  // namespace invmc

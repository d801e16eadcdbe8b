#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "invmc/model.hpp"
#include "invmc/rng.hpp"

namespace invmc {

/// X' = X + alpha (mu - X) + sigma xi.
struct Ar1Euler {
    double alpha = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
};

/// Log-price Y' = Y + rate (level - Y) + vol xi + J, J = jump_sd xi_j 1{U < jump_prob}.
struct JumpPrice {
    double rate = 0.2055;
    double level = 4.1995;
    double vol = 0.11856;
    double jump_prob = 0.017;
    double jump_sd = 0.4229;
};

/// Centred square root of wind speed: y' = coef y + noise xi; speed w = (y + offset)^2.
struct SquaredAr1Wind {
    double coef = 0.7633;
    double noise = 0.4020;
    double offset = 2.0;
};

/// Deseasonalised temperature: T' = coef T + noise xi.
struct SeasonalAr1Temp {
    double coef = -0.92;
    double noise = 2.14;
};

/// Finite Markov chain on `states`; transition is row-major S x S.
struct FiniteChain {
    std::vector<double> states;
    std::vector<double> transition;
};

/// User-defined recursion without an analytic one-step law.
struct CustomStep {
    std::function<double(int n, double x, double normal, double uniform)> step;
};

using ProcessComponent = std::variant<Ar1Euler, JumpPrice, SquaredAr1Wind, SeasonalAr1Temp, FiniteChain, CustomStep>;

/// Exogenous process made of independent one-dimensional components.
struct ProcessSpec {
    std::vector<ProcessComponent> components;
    int dim() const { return static_cast<int>(components.size()); }
};

void validate(const ProcessSpec& spec);

/// One atom of a Gaussian mixture (sd == 0 is a point mass).
struct MixtureAtom {
    double weight;
    double mean;
    double sd;
};

/// Exact law of the next value of a component given the current one.
/// Throws UnsupportedMoment for CustomStep.
std::vector<MixtureAtom> one_step_law(const ProcessComponent& c, int n, double x);

/// E[X'^j | X = x], j = 0..max_degree, for one component.
std::vector<double> conditional_poly_moments(const ProcessComponent& c, int n, double x, int max_degree);
/// Same moments written to out[0..max_degree].
void conditional_poly_moments_into(const ProcessComponent& c, int n, double x, int max_degree, double* out);

/// Per-component moment table: result[d][j] = E[X'_d^j | X = x].
std::vector<std::vector<double>> conditional_poly_moments(const ProcessSpec& spec, int n, Vec x, int max_degree);

/// E[X^j 1{lo <= X <= hi}] for X ~ N(mean, sd^2), j = 0..max_degree. lo/hi may be infinite.
std::vector<double> truncated_gaussian_moments(double mean, double sd, double lo, double hi, int max_degree);

/// E[X'^j 1{lo <= X' < hi} | X = x] for one component (mixture of truncated Gaussians).
std::vector<double> conditional_truncated_moments(const ProcessComponent& c, int n, double x, double lo, double hi,
                                                  int max_degree);

/// Draws the next state of every component from the stream at `step`.
/// Component d consumes counter slots 2d and 2d+1.
void sample_next(const ProcessSpec& spec, int n, Vec x, const PathStream& stream, MutVec out);

/// M simulated trajectories of the exogenous process, path-major layout:
/// value(m, n, d) is stored at ((m * (N + 1)) + n) * p + d.
class PathSet {
public:
    PathSet() = default;
    PathSet(int m_paths, int n_steps, int dim, std::uint64_t seed);

    int paths() const { return m_; }
    int steps() const { return n_; }
    int dim() const { return p_; }
    std::uint64_t seed() const { return seed_; }

    Vec state(int m, int n) const { return {values_.data() + offset(m, n), static_cast<std::size_t>(p_)}; }
    MutVec state(int m, int n) { return {values_.data() + offset(m, n), static_cast<std::size_t>(p_)}; }
    double value(int m, int n, int d) const { return values_[offset(m, n) + d]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool operator==(const PathSet& other) const = default;

private:
    std::size_t offset(int m, int n) const {
        return (static_cast<std::size_t>(m) * (n_ + 1) + n) * static_cast<std::size_t>(p_);
    }
    int m_ = 0;
    int n_ = 0;
    int p_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> values_;
};

/// Path m uses the counter stream (seed, m); the result does not depend on
/// the worker count.
PathSet simulate_paths(const ProcessSpec& spec, int m_paths, int n_steps, Vec x0, std::uint64_t seed);

void write_paths_csv(const PathSet& paths, const std::string& file);
PathSet read_paths_csv(const std::string& file);
void write_paths_binary(const PathSet& paths, const std::string& file);
PathSet read_paths_binary(const std::string& file);

// Observation maps from underlying coordinates to physical quantities.

/// Periodic seasonal term: `table[n % table.size()]` when a table is given,
/// otherwise amplitude * sin(2 pi n / period).
struct SeasonalProfile {
    double amplitude = 5.0;
    int period = 24;
    std::vector<double> table;
    double at(int n) const;
};

enum class WindPowerVariant { AsWritten, RatedCapped };

/// Hourly wind energy (MWh) from speed w (m/s).
struct WindPowerMap {
    WindPowerVariant variant = WindPowerVariant::RatedCapped;
    double cp = 0.4;
    double air_density = 1.225;
    double swept_area = 2500.0 * 3.14159265358979323846;
    double rated_speed = 14.0;
    double rated_energy = 2.1;
    double energy(double speed) const;
};

/// Demand = max(0, polynomial(T) / divisor), coefficients in ascending powers of T.
/// The quintic turns negative below about -20 degrees.
struct DemandPoly {
    std::vector<double> coefficients{6784.9728, -235.5911, -2.2869, 0.8897, -0.0204, 0.000105};
    double divisor = 30000.0;
    double demand(double temperature) const;
};

/// Wind offset such that the stationary mean of map.energy((y + offset)^2) equals
/// target_energy. Deterministic quadrature over the stationary law of y.
double calibrate_wind_offset(const SquaredAr1Wind& wind, const WindPowerMap& map, double target_energy);

/// Stationary mean wind energy for the given offset.
double stationary_mean_wind_energy(const SquaredAr1Wind& wind, const WindPowerMap& map);

}  // namespace invmc

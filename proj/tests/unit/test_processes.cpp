#include <catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "invmc/error.hpp"
#include "invmc/parallel.hpp"
#include "invmc/processes.hpp"
#include "mc_check.hpp"

using namespace invmc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Composite Simpson rule for E[X^j 1{lo <= X <= hi}], X ~ N(m, s^2), on a finite window.
double simpson_truncated(double m, double s, double lo, double hi, int j) {
    lo = std::max(lo, m - 12 * s);
    hi = std::min(hi, m + 12 * s);
    if (hi <= lo) return 0.0;
    const int n = 20000;
    const double h = (hi - lo) / n;
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double v = lo + k * h;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double z = (v - m) / s;
        total += w * std::pow(v, j) * std::exp(-0.5 * z * z) / (s * std::sqrt(2 * std::numbers::pi));
    }
    return total * h / 3.0;
}

std::vector<ProcessComponent> all_analytic_components() {
    return {Ar1Euler{0.01, 5.0, 0.35}, JumpPrice{}, SquaredAr1Wind{}, SeasonalAr1Temp{},
            FiniteChain{{1.0, 2.0, 3.0}, {0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5}}};
}

}  // namespace

TEST_CASE("one-step laws are normalised mixtures", "[processes]") {
    for (const auto& c : all_analytic_components()) {
        const double x = std::holds_alternative<FiniteChain>(c) ? 2.0 : 0.7;
        double total = 0.0;
        for (const auto& atom : one_step_law(c, 0, x)) {
            CHECK(atom.weight >= 0.0);
            CHECK(atom.sd >= 0.0);
            total += atom.weight;
        }
        CHECK_THAT(total, WithinAbs(1.0, 1e-14));
    }
    const ProcessComponent custom = CustomStep{[](int, double x, double z, double) { return x + z; }};
    CHECK_THROWS_AS(one_step_law(custom, 0, 0.0), UnsupportedMoment);
    CHECK_THROWS_AS(conditional_poly_moments(custom, 0, 0.0, 2), UnsupportedMoment);
}

TEST_CASE("AR(1) conditional moments have the Gaussian closed form", "[processes]") {
    const Ar1Euler p{0.01, 5.0, 0.35};
    const double x = 4.0;
    const double m = x + 0.01 * (5.0 - x);
    const double v = 0.35 * 0.35;
    const auto mom = conditional_poly_moments(ProcessComponent{p}, 3, x, 4);
    CHECK(mom[0] == 1.0);
    CHECK_THAT(mom[1], WithinRel(m, 1e-14));
    CHECK_THAT(mom[2], WithinRel(m * m + v, 1e-14));
    CHECK_THAT(mom[3], WithinRel(m * m * m + 3 * m * v, 1e-14));
    CHECK_THAT(mom[4], WithinRel(std::pow(m, 4) + 6 * m * m * v + 3 * v * v, 1e-14));
}

TEST_CASE("truncated Gaussian moments match quadrature", "[processes]") {
    const double inf = std::numeric_limits<double>::infinity();
    struct Window {
        double lo, hi;
    };
    for (const Window w : {Window{-inf, inf}, Window{-1.0, 0.5}, Window{0.3, inf}, Window{-inf, -2.0}, Window{5.0, 6.0}}) {
        const auto mom = truncated_gaussian_moments(0.4, 1.3, w.lo, w.hi, 5);
        for (int j = 0; j <= 5; ++j) {
            INFO("window [" << w.lo << ", " << w.hi << "], degree " << j);
            CHECK_THAT(mom[j], WithinAbs(simpson_truncated(0.4, 1.3, w.lo, w.hi, j), 1e-9));
        }
    }
    // Point masses of a finite chain fall inside or outside the window.
    const ProcessComponent chain = FiniteChain{{1.0, 2.0}, {0.25, 0.75, 0.5, 0.5}};
    const auto part = conditional_truncated_moments(chain, 0, 1.0, 1.5, 3.0, 2);
    CHECK(part == std::vector<double>{0.75, 1.5, 3.0});
}

TEST_CASE("conditional moments agree with Monte Carlo for every component", "[processes]") {
    set_num_threads(1);
    for (const auto& c : all_analytic_components()) {
        const double x = std::holds_alternative<FiniteChain>(c) ? 3.0 : 0.8;
        ProcessSpec spec{{c}};
        BasisSpec basis = exo_only(1, tensor_terms({4}));
        const std::vector<double> xs{x};
        const testing::McEstimate mc = testing::mc_conditional_basis(basis, spec, 2, xs, {}, 200000, 11);
        const Eigen::VectorXd exact = eval_conditional_basis(basis, spec, 2, xs, {});
        CHECK(testing::max_standardised_error(exact, mc) < 4.5);
    }
}

TEST_CASE("truncated conditional moments partition the full moments", "[processes]") {
    const ProcessComponent c = JumpPrice{};
    const auto full = conditional_poly_moments(c, 0, 3.7, 3);
    const auto a = conditional_truncated_moments(c, 0, 3.7, -std::numeric_limits<double>::infinity(), 3.9, 3);
    const auto b = conditional_truncated_moments(c, 0, 3.7, 3.9, std::numeric_limits<double>::infinity(), 3);
    for (int j = 0; j <= 3; ++j) CHECK_THAT(a[j] + b[j], WithinRel(full[j], 1e-12));
}

TEST_CASE("path simulation is deterministic and independent of worker count", "[processes]") {
    const ProcessSpec spec{{SquaredAr1Wind{}, SeasonalAr1Temp{}, JumpPrice{}}};
    const std::vector<double> x0{0.1, -1.0, 3.5};
    set_num_threads(1);
    const PathSet one = simulate_paths(spec, 37, 20, x0, 5);
    set_num_threads(4);
    const PathSet four = simulate_paths(spec, 37, 20, x0, 5);
    set_num_threads(1);
    CHECK(one == four);
    CHECK(one.value(3, 0, 2) == 3.5);
    CHECK_FALSE(one == simulate_paths(spec, 37, 20, x0, 6));
    // Path m depends only on (seed, m).
    const PathSet fewer = simulate_paths(spec, 5, 20, x0, 5);
    for (int n = 0; n <= 20; ++n) CHECK(fewer.value(4, n, 1) == one.value(4, n, 1));
}

TEST_CASE("path files round-trip exactly", "[processes]") {
    const ProcessSpec spec{{Ar1Euler{0.01, 5.0, 0.35}, JumpPrice{}}};
    const std::vector<double> x0{5.0, 3.0};
    const PathSet paths = simulate_paths(spec, 9, 7, x0, 3);
    const auto dir = std::filesystem::temp_directory_path() / "invmc_paths_test";
    std::filesystem::create_directories(dir);
    write_paths_csv(paths, (dir / "p.csv").string());
    write_paths_binary(paths, (dir / "p.bin").string());
    const PathSet csv = read_paths_csv((dir / "p.csv").string());
    const PathSet bin = read_paths_binary((dir / "p.bin").string());
    CHECK(csv.values() == paths.values());
    CHECK(bin == paths);
    std::filesystem::remove_all(dir);
}

TEST_CASE("invalid process parameters are rejected", "[processes]") {
    CHECK_THROWS(validate(ProcessSpec{{Ar1Euler{0.1, 0.0, -1.0}}}));
    CHECK_THROWS(validate(ProcessSpec{{FiniteChain{{1.0, 2.0}, {0.5, 0.4, 0.5, 0.5}}}}));
    CHECK_THROWS(validate(ProcessSpec{{JumpPrice{0.2, 4.0, 0.1, 1.5, 0.4}}}));
    CHECK_THROWS(validate(ProcessSpec{}));
    CHECK_NOTHROW(validate(ProcessSpec{{SquaredAr1Wind{}, SeasonalAr1Temp{}}}));
}

TEST_CASE("observation maps", "[processes]") {
    const WindPowerMap map;
    const double k = 1e-6 * 0.4 * 1.225 * 2500.0 * std::numbers::pi;
    CHECK_THAT(map.energy(5.0), WithinRel(k * 125.0, 1e-14));
    CHECK(map.energy(30.0) == 2.1);
    CHECK(map.energy(0.0) == 0.0);

    const DemandPoly poly;
    CHECK_THAT(poly.demand(0.0), WithinRel(6784.9728 / 30000.0, 1e-14));
    CHECK(poly.demand(-30.0) == 0.0);
    CHECK_THAT(poly.demand(10.0),
               WithinRel((6784.9728 - 2355.911 - 228.69 + 889.7 - 204.0 + 10.5) / 30000.0, 1e-12));

    const SeasonalProfile daily{5.0, 24, {}};
    CHECK_THAT(daily.at(6), WithinAbs(5.0, 1e-12));
    CHECK_THAT(daily.at(24), WithinAbs(0.0, 1e-12));
    const SeasonalProfile table{0.0, 24, {1.0, 2.0, 3.0}};
    CHECK(table.at(4) == 2.0);
}

TEST_CASE("wind calibration hits the stationary mean energy", "[processes]") {
    const WindPowerMap map;
    SquaredAr1Wind wind;
    wind.offset = calibrate_wind_offset(wind, map, 0.35);
    CHECK_THAT(stationary_mean_wind_energy(wind, map), WithinAbs(0.35, 1e-9));

    // Monte Carlo over the stationary law of y.
    const double sd = wind.noise / std::sqrt(1.0 - wind.coef * wind.coef);
    const PathStream stream(3, 0);
    const int n = 400000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < n / 2; ++k) {
        for (double z : stream.normals(static_cast<std::uint32_t>(k), DrawPurpose::Exogenous, 0)) {
            const double y = sd * z + wind.offset;
            const double e = map.energy(y * y);
            sum += e;
            sum2 += e * e;
        }
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.35) < 5 * se);
}

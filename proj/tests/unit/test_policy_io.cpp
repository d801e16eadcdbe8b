#include <catch_amalgamated.hpp>
#include <filesystem>

#include "invmc/benchmarks.hpp"
#include "invmc/solvers.hpp"

using namespace invmc;

TEST_CASE("policies round-trip through JSON", "[policy]") {
    for (const auto& name : benchmark_names()) {
        const auto b = build_benchmark(name, name == "arbitrage" ? R"({"dt": 0.02})" : "{}");
        const int steps = b.problem->horizon();
        const PathSet paths = simulate_paths(b.process, 60, steps, b.x0, 3);
        for (Algorithm a : {Algorithm::RegressLater, Algorithm::GridDiscretisation, Algorithm::ControlRandomisation}) {
            if (name != "arbitrage" && a != Algorithm::RegressLater) continue;
            SolverConfig config = b.config(a, Mode::ValueIteration);
            config.m_paths = 60;
            if (a == Algorithm::GridDiscretisation) config.grid_levels = 3;
            const Policy p = solve(*b.problem, paths, config).policy;
            const std::string text = policy_to_json(p);
            const Policy q = policy_from_json(text);
            INFO(name << " / " << to_string(a));
            CHECK(policy_to_json(q) == text);
            for (int n : {0, steps / 2, steps - 1}) {
                const auto x = paths.state(7, n);
                const auto d1 = p.decide(*b.problem, n, x, b.i0);
                const auto d2 = q.decide(*b.problem, n, x, b.i0);
                CHECK(d1.u == d2.u);
                CHECK(d1.value == d2.value);
            }
        }
    }
}

TEST_CASE("policies save to and load from files", "[policy]") {
    const auto b = build_benchmark("arbitrage");
    const Policy p = myopic_policy(*b.problem);
    const auto file = std::filesystem::temp_directory_path() / "invmc_policy_test.json";
    save_policy(p, file.string());
    const Policy q = load_policy(file.string());
    CHECK(q.algorithm == Algorithm::Myopic);
    CHECK(q.fingerprint == b.problem->fingerprint());
    std::filesystem::remove(file);
    CHECK_THROWS(policy_from_json(R"({"format": "other"})"));
    CHECK_THROWS(load_policy("/nonexistent/policy.json"));
}

TEST_CASE("step rules agree with direct decisions", "[policy]") {
    const auto b = build_benchmark("hydro");
    const PathSet paths = simulate_paths(b.process, 40, b.problem->horizon(), b.x0, 3);
    SolverConfig config = b.config(Algorithm::RegressLater, Mode::ValueIteration);
    config.m_paths = 40;
    const Policy p = solve(*b.problem, paths, config).policy;
    const auto x = paths.state(3, 100);
    const Policy::StepRule rule = p.at(100, x);
    for (const auto& i : std::vector<std::vector<double>>{{0.0, 0.0}, {1.2, 0.4}, {2.0, 1.0}}) {
        CHECK(rule.decide(*b.problem, i).u == p.decide(*b.problem, 100, x, i).u);
    }
}

TEST_CASE("grid helpers", "[policy]") {
    const auto levels = uniform_levels({2.0, 1.0}, 3);
    CHECK(levels[0] == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(levels[1] == std::vector<double>{0.0, 0.5, 1.0});
    // f(a, b) = a + 10 b is reproduced exactly by multilinear interpolation.
    std::vector<double> values;
    for (double b : levels[1]) {
        for (double a : levels[0]) values.push_back(a + 10 * b);
    }
    const std::vector<double> point{1.3, 0.8};
    CHECK(std::abs(multilinear_interpolate(levels, values.data(), point) - 9.3) < 1e-12);
    const std::vector<double> beyond{5.0, -1.0};
    CHECK(multilinear_interpolate(levels, values.data(), beyond) == 2.0);
    CHECK(algorithm_from_string("RL") == Algorithm::RegressLater);
    CHECK(mode_from_string("performance") == Mode::PerformanceIteration);
    CHECK_THROWS(algorithm_from_string("bogus"));
}

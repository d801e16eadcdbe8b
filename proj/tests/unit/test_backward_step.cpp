#include <catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>

#include "invmc/benchmarks.hpp"
#include "invmc/solvers.hpp"
#include "lemma_suite.hpp"

using namespace invmc;

namespace {

const std::vector<double> kZ{5.0};

}  // namespace

TEST_CASE("constant control maps give the closed-form antecedent", "[backward]") {
    const auto b = build_benchmark("arbitrage");
    for (double c : {-11.5, 0.0, 11.5}) {
        const BackwardResult r =
            backward_inventory_step(*b.problem, 0, kZ, 0.4, [c](double) { return std::vector<double>{c}; });
        REQUIRE(r.found);
        CHECK(std::abs(r.antecedent - (0.4 - c / 200.0)) <= 1e-9);
    }
}

TEST_CASE("a full target cannot follow a sale", "[backward]") {
    const auto b = build_benchmark("arbitrage");
    const BackwardResult r =
        backward_inventory_step(*b.problem, 0, kZ, 1.0, [](double) { return std::vector<double>{-11.5}; });
    CHECK_FALSE(r.found);
}

TEST_CASE("antecedent of a clamped linear map matches a fine scan", "[backward]") {
    // Unit-step additive storage so that the control moves the level visibly.
    ProblemDefinition def;
    def.horizon = 1;
    def.inv_max = {1.0};
    def.controls = BoxControls{{-0.5}, {0.5}};
    def.additive = AdditiveTransition{{1.0}, {0.0}};
    def.running_reward = [](int, Vec, Vec, Vec) { return 0.0; };
    def.terminal_reward = [](Vec, Vec) { return 0.0; };
    const ControlProblem p(def);
    auto u_star = [](double y) { return std::vector<double>{std::clamp(0.3 - 0.5 * y, -0.5, 0.5)}; };
    for (double y_next : {0.3, 0.35, 0.5, 0.64, 0.8}) {
        const BackwardResult r = backward_inventory_step(p, 0, kZ, y_next, u_star);
        REQUIRE(r.found);
        double best_y = 0.0;
        double best = INFINITY;
        const int points = 1000000;
        for (int k = 0; k <= points; ++k) {
            const double y = static_cast<double>(k) / points;
            const double psi = std::abs(y_next - (y + u_star(y)[0]));
            if (psi < best) {
                best = psi;
                best_y = y;
            }
        }
        INFO("y_next = " << y_next);
        CHECK(std::abs(r.antecedent - best_y) < 1e-6);
        CHECK(std::abs(r.antecedent + u_star(r.antecedent)[0] - y_next) <= 1e-9);
    }
}

TEST_CASE("a jump of the control map across the target is not a root", "[backward]") {
    const auto b = build_benchmark("arbitrage");
    // phi jumps from 0.4425 to 0.5575 at y = 0.5: no level reaches 0.5.
    auto jump = [](double y) { return std::vector<double>{y < 0.5 ? -11.5 : 11.5}; };
    const BackwardResult r = backward_inventory_step(*b.problem, 0, kZ, 0.5, jump);
    CHECK_FALSE(r.found);
}

TEST_CASE("randomised monotone maps satisfy the existence lemma", "[backward]") {
    const testing::LemmaSuiteResult r = testing::run_lemma_suite(100, 20, 3);
    CHECK(r.inside_checked == 1000);
    CHECK(r.inside_failures == 0);
    CHECK(r.outside_checked > 100);
    CHECK(r.outside_failures == 0);
    CHECK(r.max_residual <= 1e-9);
}

#include <catch_amalgamated.hpp>
#include <cmath>

#include "invmc/basis.hpp"
#include "invmc/benchmarks.hpp"
#include "invmc/error.hpp"
#include "invmc/parallel.hpp"
#include "mc_check.hpp"

using namespace invmc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("term builders", "[basis]") {
    CHECK(tensor_terms({2, 1}).size() == 6);
    CHECK(tensor_terms({2, 1}).front() == std::vector<int>{0, 0});
    CHECK(total_degree_terms(2, 2).size() == 6);
    CHECK(total_degree_terms(3, 3).size() == 20);
    const auto p = product_terms(total_degree_terms(1, 2), total_degree_terms(2, 2));
    CHECK(p.size() == 18);
    CHECK(p[4] == std::vector<int>{1, 1, 0});
}

TEST_CASE("basis validation", "[basis]") {
    CHECK_THROWS(poly_product(1, 1, {{0, 0}, {0, 0}}));
    CHECK_THROWS(poly_product(1, 1, {{0, 0, 1}}));
    CHECK_THROWS(poly_product(1, 1, {{-1, 0}}));
    CHECK_THROWS(poly_with_control(1, 1, 0, {{0, 0}}));
    CHECK_THROWS(hypercube_affine(1, 1, {{{0.0, 0.0}, {1.0, 1.0}}, {{0.5, 0.5}, {2.0, 2.0}}}));
    BasisSpec s = poly_product(1, 1, {{0, 0}, {1, 0}});
    s.scaling = {{0.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS(validate(s));
    CHECK(to_string(basis_kind_from_string("HypercubeAffine")) == "HypercubeAffine");
}

TEST_CASE("polynomial terms are evaluated on scaled coordinates", "[basis]") {
    BasisSpec s = poly_with_control(1, 1, 1, {{0, 0, 0}, {2, 0, 0}, {1, 1, 0}, {0, 0, 3}});
    s.scaling = {{1.0, 0.5, 0.0}, {2.0, 0.5, 10.0}};
    const std::vector<double> x{5.0};
    const std::vector<double> i{0.75};
    const std::vector<double> u{5.0};
    const Eigen::VectorXd phi = eval_basis(s, x, i, u);
    CHECK(phi[0] == 1.0);
    CHECK_THAT(phi[1], WithinRel(4.0, 1e-15));
    CHECK_THAT(phi[2], WithinRel(1.0, 1e-15));
    CHECK_THAT(phi[3], WithinRel(0.125, 1e-15));
    CHECK_THROWS_AS(eval_basis(s, x, i), DimensionMismatch);
}

TEST_CASE("hypercube basis is piecewise affine in raw coordinates", "[basis]") {
    const auto boxes = regular_boxes({0.0, 0.0}, {2.0, 1.0}, {2, 2});
    CHECK(boxes.size() == 4);
    const BasisSpec s = hypercube_affine(1, 1, boxes);
    CHECK(s.size() == 12);
    const std::vector<double> x{1.5};
    const std::vector<double> i{0.25};
    const Eigen::VectorXd phi = eval_basis(s, x, i);
    CHECK(phi.sum() == 1.0 + 1.5 + 0.25);
    CHECK(phi[3] == 1.0);
    CHECK(phi[4] == 1.5);
    CHECK(phi[5] == 0.25);
}

TEST_CASE("conditional basis matches Monte Carlo for the benchmark bases", "[basis]") {
    set_num_threads(1);
    for (const auto& name : benchmark_names()) {
        const BenchmarkBundle b = build_benchmark(name);
        BasisSpec spec = b.rl_basis;
        const PathSet paths = simulate_paths(b.process, 200, b.problem->horizon(), b.x0, 3);
        spec.scaling = auto_scaling(spec, *b.problem, paths);
        const auto x = std::vector<double>(paths.state(17, 3).begin(), paths.state(17, 3).end());
        std::vector<double> i(b.problem->inv_dim());
        for (std::size_t d = 0; d < i.size(); ++d) i[d] = 0.3 * b.problem->inv_max()[d];
        const Eigen::VectorXd exact = eval_conditional_basis(spec, b.process, 3, x, i);
        const auto mc = testing::mc_conditional_basis(spec, b.process, 3, x, i, 100000, 5);
        INFO(name);
        CHECK(testing::max_standardised_error(exact, mc) < 4.5);
    }
}

TEST_CASE("conditional hypercube basis matches Monte Carlo", "[basis]") {
    const ProcessSpec process{{Ar1Euler{0.3, 1.0, 0.8}, JumpPrice{}}};
    const BasisSpec s = hypercube_affine(2, 1, regular_boxes({0.0, 3.5, 0.0}, {2.0, 4.5, 1.0}, {3, 2, 2}));
    const std::vector<double> x{0.6, 4.0};
    const std::vector<double> i{0.7};
    const Eigen::VectorXd exact = eval_conditional_basis(s, process, 0, x, i);
    const auto mc = testing::mc_conditional_basis(s, process, 0, x, i, 100000, 9);
    CHECK(testing::max_standardised_error(exact, mc) < 4.5);
}

TEST_CASE("contracted functions equal the explicit inner products", "[basis]") {
    const ProcessSpec process{{Ar1Euler{0.3, 1.0, 0.8}, SquaredAr1Wind{}}};
    BasisSpec s = poly_product(2, 2, product_terms(total_degree_terms(2, 3), total_degree_terms(2, 2)));
    s.scaling = {{1.0, 0.0, 1.0, 0.5}, {2.0, 1.5, 1.0, 0.5}};
    Eigen::VectorXd alpha(s.size());
    for (int k = 0; k < s.size(); ++k) alpha[k] = std::sin(1.0 + k);
    const std::vector<double> x{0.4, -0.3};
    const InventoryFunction cond = contract_conditional(s, process, 0, x, alpha);
    const InventoryFunction at = contract_at(s, x, alpha);
    for (double a : {0.0, 0.4, 1.9}) {
        for (double b : {0.0, 0.6, 1.0}) {
            const std::vector<double> i{a, b};
            CHECK_THAT(cond(i), WithinAbs(alpha.dot(eval_conditional_basis(s, process, 0, x, i)), 1e-10));
            CHECK_THAT(at(i), WithinAbs(alpha.dot(eval_basis(s, x, i)), 1e-10));
        }
    }

    const BasisSpec h = hypercube_affine(2, 2, regular_boxes({0.0, -1.0, 0.0, 0.0}, {2.0, 1.0, 2.0, 1.0}, {2, 2, 3, 2}));
    Eigen::VectorXd beta(h.size());
    for (int k = 0; k < h.size(); ++k) beta[k] = std::cos(0.5 * k);
    const InventoryFunction hc = contract_conditional(h, process, 0, x, beta);
    for (double a : {0.1, 0.9, 1.7}) {
        const std::vector<double> i{a, 0.2};
        CHECK_THAT(hc(i), WithinAbs(beta.dot(eval_conditional_basis(h, process, 0, x, i)), 1e-12));
    }

    BasisSpec c = poly_with_control(1, 1, 2, total_degree_terms(4, 2));
    Eigen::VectorXd gamma(c.size());
    for (int k = 0; k < c.size(); ++k) gamma[k] = 0.1 * k - 0.4;
    const std::vector<double> xc{0.2};
    const std::vector<double> ic{0.6};
    const ControlFunction cf = contract_control(c, xc, ic, gamma);
    const std::vector<double> u{0.3, -1.2};
    CHECK_THAT(cf(u), WithinAbs(gamma.dot(eval_basis(c, xc, ic, u)), 1e-12));
}

TEST_CASE("auto scaling maps inventory capacity to [-1, 1]", "[basis]") {
    const BenchmarkBundle b = build_benchmark("hydro");
    const PathSet paths = simulate_paths(b.process, 100, 50, b.x0, 1);
    const AffineScaling s = auto_scaling(b.rl_basis, *b.problem, paths);
    REQUIRE(s.center.size() == 3);
    CHECK(s.center[1] == 1.0);
    CHECK(s.half_width[1] == 1.0);
    CHECK(s.center[2] == 0.5);
    CHECK(s.half_width[2] == 0.5);
    CHECK(s.center[0] > 35.0);
    CHECK(s.center[0] < 45.0);
}

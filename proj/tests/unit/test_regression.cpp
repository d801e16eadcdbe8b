#include <catch_amalgamated.hpp>
#include <cmath>

#include "invmc/error.hpp"
#include "invmc/regression.hpp"

using namespace invmc;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
    std::srand(seed);
    return Eigen::MatrixXd::Random(rows, cols);
}

Eigen::VectorXd svd_min_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    return svd.solve(b);
}

}  // namespace

TEST_CASE("full-rank fits agree with an SVD solve", "[regression]") {
    const Eigen::MatrixXd a = random_matrix(200, 7, 1);
    const Eigen::VectorXd b = random_matrix(200, 1, 2);
    const FitResult fit = fit_least_squares(a, b);
    CHECK(fit.diagnostics.rank == 7);
    CHECK_FALSE(fit.diagnostics.rank_deficient);
    CHECK((fit.coefficients - svd_min_norm(a, b)).norm() < 1e-12);
    // Normal equations hold at the solution.
    CHECK((a.transpose() * (a * fit.coefficients - b)).norm() < 1e-11);
}

TEST_CASE("rank-deficient designs fall back to the minimum-norm solution", "[regression]") {
    Eigen::MatrixXd a = random_matrix(100, 6, 3);
    a.col(4) = 2.0 * a.col(1) - a.col(0);
    a.col(5) = a.col(2);
    const Eigen::VectorXd b = random_matrix(100, 1, 4);
    const FitResult fit = fit_least_squares(a, b);
    CHECK(fit.diagnostics.rank == 4);
    CHECK(fit.diagnostics.rank_deficient);
    CHECK((fit.coefficients - svd_min_norm(a, b)).norm() < 1e-9);

    RegressionOptions ridge;
    ridge.fallback = RankFallback::Ridge;
    const FitResult r = fit_least_squares(a, b, ridge);
    const double lambda = 1e-8 * (a.transpose() * a).trace() / 6.0;
    CHECK(r.diagnostics.ridge_lambda == Catch::Approx(lambda).epsilon(1e-12));
    const Eigen::MatrixXd lhs = a.transpose() * a + lambda * Eigen::MatrixXd::Identity(6, 6);
    const Eigen::VectorXd oracle = lhs.ldlt().solve(a.transpose() * b);
    CHECK((r.coefficients - oracle).norm() < 1e-6 * oracle.norm());
}

TEST_CASE("one factorisation serves several responses", "[regression]") {
    const Eigen::MatrixXd a = random_matrix(80, 5, 5);
    const Eigen::MatrixXd b = random_matrix(80, 3, 6);
    const MultiFitResult multi = fit_least_squares(a, b);
    for (int c = 0; c < 3; ++c) {
        const Eigen::VectorXd col = b.col(c);
        CHECK((multi.coefficients.col(c) - fit_least_squares(a, col).coefficients).norm() < 1e-13);
    }
}

TEST_CASE("bad regression inputs raise", "[regression]") {
    Eigen::MatrixXd a = random_matrix(10, 2, 7);
    Eigen::VectorXd b = random_matrix(10, 1, 8);
    CHECK_THROWS_AS(fit_least_squares(a, Eigen::VectorXd(b.head(9))), DimensionMismatch);
    b[3] = std::nan("");
    CHECK_THROWS_AS(fit_least_squares(a, b), NonFiniteInput);
    b[3] = 0.0;
    a(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_least_squares(a, b), NonFiniteInput);
}

TEST_CASE("an all-zero design gives zero coefficients", "[regression]") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 3);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(5);
    const FitResult fit = fit_least_squares(a, b);
    CHECK(fit.diagnostics.rank == 0);
    CHECK(fit.coefficients.isZero());
}

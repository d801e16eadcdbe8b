#include "invmc/regression.hpp"

#include <cmath>

#include "invmc/error.hpp"

namespace invmc {

MultiFitResult fit_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& responses,
                                 const RegressionOptions& options) {
    if (design.rows() < 1 || design.cols() < 1) throw DimensionMismatch("regression design must be non-empty");
    if (responses.rows() != design.rows()) throw DimensionMismatch("responses and design have different row counts");
    if (!design.allFinite()) throw NonFiniteInput("regression design contains NaN or Inf");
    if (!responses.allFinite()) throw NonFiniteInput("regression responses contain NaN or Inf");

    MultiFitResult result;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(options.pivot_threshold);
    const int k = static_cast<int>(design.cols());
    auto& diag = result.diagnostics;
    diag.rank = static_cast<int>(qr.rank());
    diag.rank_deficient = diag.rank < k;
    const auto& r = qr.matrixR();
    if (diag.rank > 0) {
        diag.condition_estimate = std::abs(r(0, 0)) / std::abs(r(diag.rank - 1, diag.rank - 1));
    }

    if (!diag.rank_deficient) {
        result.coefficients = qr.solve(responses);
        return result;
    }
    if (options.fallback == RankFallback::MinNorm) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
        cod.setThreshold(options.pivot_threshold);
        cod.compute(design);
        result.coefficients = cod.solve(responses);
        return result;
    }
    const Eigen::MatrixXd gram = design.transpose() * design;
    diag.ridge_lambda = 1e-8 * gram.trace() / k;
    if (!(diag.ridge_lambda > 0.0)) diag.ridge_lambda = 1e-8;
    Eigen::MatrixXd regularised = gram;
    regularised.diagonal().array() += diag.ridge_lambda;
    result.coefficients = regularised.ldlt().solve(design.transpose() * responses);
    return result;
}

FitResult fit_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses,
                            const RegressionOptions& options) {
    auto multi = fit_least_squares(design, Eigen::MatrixXd(responses), options);
    return {multi.coefficients.col(0), multi.diagnostics};
}

}  // namespace invmc

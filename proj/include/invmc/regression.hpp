#pragma once

#include <Eigen/Dense>

namespace invmc {

/// What to do when the design is numerically rank deficient.
enum class RankFallback {
    MinNorm,  ///< minimum-norm least-squares solution
    Ridge,    ///< ridge with lambda = 1e-8 * trace(A^T A) / K
};

struct RegressionOptions {
    /// Relative pivot threshold of the column-pivoting QR.
    double pivot_threshold = 1e-10;
    RankFallback fallback = RankFallback::MinNorm;
};

struct RegressionDiagnostics {
    int rank = 0;
    bool rank_deficient = false;
    /// |R_00| / |R_kk| of the pivoted QR over the retained pivots.
    double condition_estimate = 1.0;
    /// Non-zero only when the ridge fallback was used.
    double ridge_lambda = 0.0;
};

struct FitResult {
    Eigen::VectorXd coefficients;
    RegressionDiagnostics diagnostics;
};

struct MultiFitResult {
    /// K x R, one column per response column.
    Eigen::MatrixXd coefficients;
    RegressionDiagnostics diagnostics;
};

/// argmin_beta |design * beta - responses|^2 by column-pivoting QR.
/// Throws NonFiniteInput on NaN/Inf input, DimensionMismatch on shape errors.
FitResult fit_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses,
                            const RegressionOptions& options = {});

/// Same design, several response columns: the design is factored once.
MultiFitResult fit_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& responses,
                                 const RegressionOptions& options = {});

}  // namespace invmc

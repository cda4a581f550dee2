#pragma once

#include <Eigen/Dense>

namespace maximin {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative pivot / singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-12;

/// Factorization-based positive-definiteness check: pivoted LDLT with every
/// pivot above kRankTolerance times the largest one.
bool is_positive_definite(const MatrixXd& a);

/// Throws DefinitenessError (naming `what`) unless `a` is symmetric positive
/// definite.
void require_positive_definite(const MatrixXd& a, const char* what);

/// Moore-Penrose inverse of a symmetric matrix. Eigenvalues below
/// kRankTolerance times the largest magnitude are treated as zero.
MatrixXd pinv_symmetric(const MatrixXd& a);

/// Numerical rank of a symmetric PSD matrix under the same threshold.
int rank_symmetric(const MatrixXd& a);

inline MatrixXd symmetrized(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

/// Differences (b_2 - b_1, ..., b_k - b_1) of the columns of `points`.
MatrixXd column_differences(const MatrixXd& points);

}  // namespace maximin

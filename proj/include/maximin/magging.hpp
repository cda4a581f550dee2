#pragma once

#include <vector>

#include <Eigen/Dense>

namespace maximin {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default activity threshold on the simplex weights.
inline constexpr double kActivityThreshold = 1e-6;

struct MaggingSolution {
  VectorXd M;               // maximin point, B * alpha
  VectorXd alpha;           // convex weights
  std::vector<int> active;  // {g : alpha_g > kActivityThreshold}
  double objective = 0.0;   // M^T Sigma M
  double kkt_residual = 0.0;
  bool unique_weights = false;  // active columns affinely independent
  int iterations = 0;
};

/// argmin over b in CVX(B) of b^T Sigma b, i.e. the minimum Sigma-norm point
/// of the convex hull of the columns of B.
///
/// The simplex QP min alpha^T (B^T Sigma B) alpha is solved by a primal
/// active-set (minimum-norm-point) method in Sigma-whitened coordinates.
/// Each outer step adds the column most violating the optimality condition
/// <M, b_g - M>_Sigma >= 0; the inner loop minimizes over the affine hull of
/// the working set and drops columns whose weight would turn negative.
///
/// Throws DefinitenessError if Sigma is not positive definite and
/// ConvergenceError (with the best iterate) after 100 G iterations.
MaggingSolution maximin_point(const MatrixXd& B, const MatrixXd& Sigma);

/// Exhaustive reference: for every nonempty subset of columns, the minimum
/// Sigma-norm point of its affine hull; the smallest one with nonnegative
/// affine weights is returned. G <= 15, otherwise SizeError.
VectorXd brute_force_oracle(const MatrixXd& B, const MatrixXd& Sigma);

/// 2 b^T Sigma b_g - b^T Sigma b.
double explained_variance(const VectorXd& b, const VectorXd& b_g, const MatrixXd& Sigma);

std::vector<int> active_set(const MaggingSolution& solution,
                            double threshold = kActivityThreshold);

/// max of the simplex-QP optimality violations for weights alpha:
/// max_g (M^T Sigma M - <M, b_g>_Sigma)_+ and, over the support of alpha,
/// |<M, b_g>_Sigma - M^T Sigma M|.
double simplex_kkt_residual(const MatrixXd& gram, const VectorXd& alpha,
                            double threshold = kActivityThreshold);

}  // namespace maximin

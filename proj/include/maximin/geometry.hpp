#pragma once

#include <vector>

#include <Eigen/Dense>

#include "maximin/magging.hpp"

namespace maximin {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Inner product <x, y>_Sigma = x^T Sigma y for a symmetric positive
/// definite Sigma. The factorization is computed once at construction and
/// never mutated, so a metric may be shared across threads.
class SigmaMetric {
 public:
  explicit SigmaMetric(const MatrixXd& sigma);

  const MatrixXd& matrix() const { return sigma_; }
  const MatrixXd& inverse() const { return inverse_; }
  int dim() const { return static_cast<int>(sigma_.rows()); }

  double inner(const VectorXd& x, const VectorXd& y) const { return x.dot(sigma_ * y); }
  double norm(const VectorXd& x) const;

 private:
  MatrixXd sigma_;
  MatrixXd inverse_;
};

/// Sigma-orthogonal projection of x onto the smallest affine space holding
/// the columns of `points`. Rank-deficient spans go through the
/// pseudo-inverse.
VectorXd affine_project(const VectorXd& x, const MatrixXd& points, const SigmaMetric& metric);

/// Matrix of the projection onto <b_2 - b_1, ..., b_G - b_1>^perp.
MatrixXd complement_projector(const MatrixXd& B, const SigmaMetric& metric);

VectorXd complement_project(const VectorXd& v, const MatrixXd& B, const SigmaMetric& metric);

/// Jacobian of M_Sigma(B) with respect to column g of B (restricted to the
/// active columns), as a p x p matrix J with J v = directional derivative:
///
///   J = -u M^T Sigma / ||u||^2 + (||(Id - PA_g) M|| / ||u||) Pi_B,
///   u = (Id - PA_g) b_g,
///
/// where PA_g projects onto the affine hull of the other active columns and
/// all norms are Sigma-norms. Requires at least two affinely independent
/// columns; throws DegeneracyError when ||u||_Sigma < 1e-10.
MatrixXd dmagging_dB(const MatrixXd& B_active, const SigmaMetric& metric, int g,
                     const VectorXd& M);

/// D (D^T Sigma D)^{-1} D^T with D = (b_2 - b_1, ..., b_k - b_1). Zero for a
/// single column; RankError if D is rank deficient.
MatrixXd hull_span_operator(const MatrixXd& B_active, const SigmaMetric& metric);

/// Derivative of M_Sigma(B) along a symmetric direction Delta:
/// -D (D^T Sigma D)^{-1} D^T Delta M. Zero for a single active column.
VectorXd dmagging_dSigma(const MatrixXd& B_active, const SigmaMetric& metric, const VectorXd& M,
                         const MatrixXd& Delta);

/// All first derivatives of magging at a solution.
struct MaggingDifferential {
  std::vector<int> active;
  std::vector<MatrixXd> dB;  // one Jacobian per active column, same order
  MatrixXd span_operator;    // D (D^T Sigma D)^{-1} D^T
  VectorXd M;

  /// The Sigma-direction differential as a linear map Delta -> p-vector.
  VectorXd dSigma(const MatrixXd& Delta) const { return -span_operator * (Delta * M); }
};

/// Differentials at `solution` (which must have been computed for B and the
/// metric's Sigma). Requires |A| >= 2 and unique weights; throws
/// DegeneracyError otherwise.
MaggingDifferential differentiate(const MatrixXd& B, const SigmaMetric& metric,
                                  const MaggingSolution& solution);

/// Columns of B listed in `indices`.
MatrixXd select_columns(const MatrixXd& B, const std::vector<int>& indices);

}  // namespace maximin

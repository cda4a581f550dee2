#pragma once

#include <vector>

#include <Eigen/Dense>

#include "maximin/asymvar.hpp"

namespace maximin {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// P[chi^2_dof <= x].
double chi2_cdf(int dof, double x);

/// tau with P[chi^2_dof <= tau] = prob. Bracketed Newton iteration with a
/// bisection fallback; absolute CDF error below 1e-10. Throws DomainError
/// for prob outside (0, 1) or dof < 1.
double chi2_quantile(int dof, double prob);

/// {M : (M_hat - M)^T W^{-1} (M_hat - M) <= tau / n}.
struct ConfidenceRegion {
  VectorXd center;
  MatrixXd precision;  // W^{-1}
  double radius2 = 0.0;
  double level = 0.0;  // 1 - alpha
  int n_used = 0;
  int p_used = 0;
  VectorXd eigenvalues;  // of W / n, ascending
  MatrixXd axes;         // matching unit eigenvectors, one per column
  bool vertex_mode = false;
  bool known_sigma = false;

  /// Semi-axis lengths, ascending (same order as `axes`).
  VectorXd semi_axes() const;
  /// Lebesgue volume of the ellipsoid.
  double volume() const;
};

struct Membership {
  bool inside = false;
  double value = 0.0;  // the quadratic form
};

/// Throws ConditioningError (with the eigenvalues of W) when W is not
/// positive definite or its condition number exceeds 1e12.
ConfidenceRegion build_region(const VectorXd& M_hat, const AsymptoticCovariance& W, int n,
                              double alpha);

/// Same construction from a bare covariance matrix.
ConfidenceRegion build_region(const VectorXd& M_hat, const MatrixXd& W, int n, double alpha);

Membership contains(const ConfidenceRegion& region, const VectorXd& M);

/// Largest eigenvalue of W.
double max_eigenvalue(const AsymptoticCovariance& W);
double max_eigenvalue(const MatrixXd& W);

}  // namespace maximin

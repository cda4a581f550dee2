#include "maximin/linalg.hpp"

#include <string>

#include "maximin/errors.hpp"

namespace maximin {

bool is_positive_definite(const MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  if (!a.allFinite()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return false;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) return false;
  Eigen::LDLT<MatrixXd> ldlt(symmetrized(a));
  if (ldlt.info() != Eigen::Success) return false;
  const VectorXd d = ldlt.vectorD();
  const double largest = d.maxCoeff();
  if (!(largest > 0.0)) return false;
  return d.minCoeff() > kRankTolerance * largest;
}

void require_positive_definite(const MatrixXd& a, const char* what) {
  if (!is_positive_definite(a)) {
    throw DefinitenessError(std::string(what) + " is not symmetric positive definite");
  }
}

MatrixXd pinv_symmetric(const MatrixXd& a) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(a));
  const VectorXd& lambda = eig.eigenvalues();
  const double cutoff = kRankTolerance * lambda.cwiseAbs().maxCoeff();
  VectorXd inv = VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const MatrixXd& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

int rank_symmetric(const MatrixXd& a) {
  if (a.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(a), Eigen::EigenvaluesOnly);
  const VectorXd& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > kRankTolerance * top) ++rank;
  }
  return rank;
}

MatrixXd column_differences(const MatrixXd& points) {
  const Eigen::Index k = points.cols();
  if (k <= 1) return MatrixXd(points.rows(), 0);
  return points.rightCols(k - 1).colwise() - points.col(0);
}

}  // namespace maximin

#include "maximin/geometry.hpp"

#include <cmath>
#include <string>

#include "maximin/errors.hpp"
#include "maximin/linalg.hpp"

namespace maximin {

namespace {

constexpr double kDegenerateNorm = 1e-10;

void require_full_column_rank(const MatrixXd& diffs, const SigmaMetric& metric) {
  const MatrixXd gram = diffs.transpose() * metric.matrix() * diffs;
  if (rank_symmetric(gram) < diffs.cols()) {
    throw RankError("hull difference matrix is rank deficient");
  }
}

}  // namespace

SigmaMetric::SigmaMetric(const MatrixXd& sigma) : sigma_(symmetrized(sigma)) {
  require_positive_definite(sigma, "Sigma");
  Eigen::LLT<MatrixXd> llt(sigma_);
  inverse_ = symmetrized(llt.solve(MatrixXd::Identity(sigma_.rows(), sigma_.cols())));
}

double SigmaMetric::norm(const VectorXd& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

MatrixXd select_columns(const MatrixXd& B, const std::vector<int>& indices) {
  MatrixXd out(B.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = B.col(indices[i]);
  return out;
}

VectorXd affine_project(const VectorXd& x, const MatrixXd& points, const SigmaMetric& metric) {
  if (points.cols() < 1) throw DimensionError("affine_project needs at least one point");
  const VectorXd ref = points.col(0);
  if (points.cols() == 1) return ref;
  const MatrixXd diffs = column_differences(points);
  const MatrixXd& sigma = metric.matrix();
  const MatrixXd gram = diffs.transpose() * sigma * diffs;
  return ref + diffs * (pinv_symmetric(gram) * (diffs.transpose() * (sigma * (x - ref))));
}

MatrixXd complement_projector(const MatrixXd& B, const SigmaMetric& metric) {
  const Eigen::Index p = B.rows();
  if (B.cols() <= 1) return MatrixXd::Identity(p, p);
  const MatrixXd diffs = column_differences(B);
  const MatrixXd& sigma = metric.matrix();
  const MatrixXd gram = diffs.transpose() * sigma * diffs;
  return MatrixXd::Identity(p, p) - diffs * pinv_symmetric(gram) * diffs.transpose() * sigma;
}

VectorXd complement_project(const VectorXd& v, const MatrixXd& B, const SigmaMetric& metric) {
  return complement_projector(B, metric) * v;
}

MatrixXd dmagging_dB(const MatrixXd& B_active, const SigmaMetric& metric, int g, const VectorXd& M) {
  const Eigen::Index k = B_active.cols();
  if (k < 2) throw DegeneracyError("dmagging_dB needs at least two active columns");
  if (g < 0 || g >= k) throw DimensionError("active column index out of range");
  const MatrixXd diffs = column_differences(B_active);
  try {
    require_full_column_rank(diffs, metric);
  } catch (const RankError&) {
    throw DegeneracyError("active columns are affinely dependent");
  }

  MatrixXd others(B_active.rows(), k - 1);
  for (Eigen::Index i = 0, j = 0; i < k; ++i)
    if (i != g) others.col(j++) = B_active.col(i);

  const VectorXd u = B_active.col(g) - affine_project(B_active.col(g), others, metric);
  const double u_norm = metric.norm(u);
  if (u_norm < kDegenerateNorm) {
    throw DegeneracyError("column " + std::to_string(g) +
                          " lies on the affine hull of the other active columns");
  }
  const VectorXd m_perp = M - affine_project(M, others, metric);
  const MatrixXd& sigma = metric.matrix();
  return -(u * (sigma * M).transpose()) / (u_norm * u_norm) +
         (metric.norm(m_perp) / u_norm) * complement_projector(B_active, metric);
}

MatrixXd hull_span_operator(const MatrixXd& B_active, const SigmaMetric& metric) {
  const Eigen::Index p = B_active.rows();
  if (B_active.cols() <= 1) return MatrixXd::Zero(p, p);
  const MatrixXd diffs = column_differences(B_active);
  require_full_column_rank(diffs, metric);
  const MatrixXd gram = diffs.transpose() * metric.matrix() * diffs;
  return symmetrized(diffs * gram.ldlt().solve(diffs.transpose()));
}

VectorXd dmagging_dSigma(const MatrixXd& B_active, const SigmaMetric& metric, const VectorXd& M,
                         const MatrixXd& Delta) {
  if (Delta.rows() != metric.dim() || Delta.cols() != metric.dim()) {
    throw DimensionError("Delta must be p x p");
  }
  return -hull_span_operator(B_active, metric) * (Delta * M);
}

MaggingDifferential differentiate(const MatrixXd& B, const SigmaMetric& metric,
                                  const MaggingSolution& solution) {
  if (solution.active.size() < 2) {
    throw DegeneracyError("magging differential needs at least two active groups");
  }
  if (!solution.unique_weights) {
    throw DegeneracyError("convex weights are not unique; magging is not differentiable");
  }
  MaggingDifferential diff;
  diff.active = solution.active;
  diff.M = solution.M;
  const MatrixXd active = select_columns(B, solution.active);
  for (Eigen::Index g = 0; g < active.cols(); ++g) {
    diff.dB.push_back(dmagging_dB(active, metric, static_cast<int>(g), solution.M));
  }
  try {
    diff.span_operator = hull_span_operator(active, metric);
  } catch (const RankError& e) {
    throw DegeneracyError(e.what());
  }
  return diff;
}

}  // namespace maximin

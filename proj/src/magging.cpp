#include "maximin/magging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "maximin/errors.hpp"
#include "maximin/linalg.hpp"

namespace maximin {

namespace {

// Minimizer of ||sum_i y_i c_i|| over the affine hull of the given columns,
// returned as affine weights (sum to one, possibly negative).
VectorXd affine_min_weights(const MatrixXd& pts) {
  const Eigen::Index k = pts.cols();
  VectorXd y = VectorXd::Zero(k);
  if (k == 1) {
    y(0) = 1.0;
    return y;
  }
  const MatrixXd diffs = column_differences(pts);
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(diffs);
  cod.setThreshold(kRankTolerance);
  const VectorXd t = cod.solve(-pts.col(0));
  y(0) = 1.0 - t.sum();
  y.tail(k - 1) = t;
  return y;
}

MatrixXd whitened(const MatrixXd& B, const MatrixXd& Sigma) {
  Eigen::LLT<MatrixXd> llt(symmetrized(Sigma));
  // Sigma = L L^T, so ||b||_Sigma = ||L^T b||.
  return llt.matrixU() * B;
}

}  // namespace

double simplex_kkt_residual(const MatrixXd& gram, const VectorXd& alpha, double threshold) {
  const VectorXd h = gram * alpha;
  const double norm2 = alpha.dot(h);
  double residual = 0.0;
  for (Eigen::Index g = 0; g < alpha.size(); ++g) {
    const double slack = h(g) - norm2;  // <M, b_g - M>_Sigma
    residual = std::max(residual, -slack);
    if (alpha(g) > threshold) residual = std::max(residual, std::abs(slack));
  }
  return residual;
}

MaggingSolution maximin_point(const MatrixXd& B, const MatrixXd& Sigma) {
  const Eigen::Index p = B.rows();
  const Eigen::Index G = B.cols();
  if (G < 1 || p < 1) throw DimensionError("maximin_point needs a nonempty p x G matrix");
  if (Sigma.rows() != p || Sigma.cols() != p) throw DimensionError("Sigma must be p x p");
  if (!B.allFinite()) throw DomainError("coefficient matrix has non-finite entries");
  require_positive_definite(Sigma, "Sigma");

  const MatrixXd C = whitened(B, Sigma);
  const MatrixXd gram = C.transpose() * C;
  const double tol = 1e-10 * gram.trace() / static_cast<double>(G);
  const int cap = 100 * static_cast<int>(G);

  // Working set S (column indices) and its weights.
  std::vector<Eigen::Index> work;
  VectorXd w;
  {
    Eigen::Index start = 0;
    gram.diagonal().minCoeff(&start);
    work.push_back(start);
    w = VectorXd::Ones(1);
  }

  auto current_point = [&]() {
    VectorXd x = VectorXd::Zero(C.rows());
    for (std::size_t i = 0; i < work.size(); ++i) x += w(static_cast<Eigen::Index>(i)) * C.col(work[i]);
    return x;
  };
  auto full_weights = [&]() {
    VectorXd a = VectorXd::Zero(G);
    for (std::size_t i = 0; i < work.size(); ++i) a(work[i]) = w(static_cast<Eigen::Index>(i));
    return a;
  };

  int iterations = 0;
  bool converged = false;
  while (iterations < cap) {
    ++iterations;
    const VectorXd x = current_point();
    const double norm2 = x.squaredNorm();
    const VectorXd proj = C.transpose() * x;
    Eigen::Index entering = 0;
    const double min_proj = proj.minCoeff(&entering);
    if (norm2 - min_proj <= tol) {
      converged = true;
      break;
    }
    if (std::find(work.begin(), work.end(), entering) != work.end()) {
      // The most violating column is already in the working set: only
      // rounding is left.
      converged = true;
      break;
    }
    work.push_back(entering);
    w.conservativeResize(static_cast<Eigen::Index>(work.size()));
    w(w.size() - 1) = 0.0;

    while (iterations < cap) {
      MatrixXd pts(C.rows(), static_cast<Eigen::Index>(work.size()));
      for (std::size_t i = 0; i < work.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = C.col(work[i]);
      const VectorXd y = affine_min_weights(pts);
      if (y.minCoeff() > 0.0) {
        w = y;
        break;
      }
      ++iterations;
      // Step from w toward y until the first weight hits zero.
      double theta = 1.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) <= 0.0 && w(i) - y(i) > 0.0) theta = std::min(theta, w(i) / (w(i) - y(i)));
      }
      w = (1.0 - theta) * w + theta * y;
      std::vector<Eigen::Index> kept;
      std::vector<double> kept_w;
      for (std::size_t i = 0; i < work.size(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi > 1e-15) {
          kept.push_back(work[i]);
          kept_w.push_back(wi);
        }
      }
      if (kept.empty()) {
        // Cannot happen in exact arithmetic; keep the heaviest column.
        Eigen::Index best = 0;
        w.maxCoeff(&best);
        kept = {work[static_cast<std::size_t>(best)]};
        kept_w = {1.0};
      }
      work = std::move(kept);
      w = Eigen::Map<VectorXd>(kept_w.data(), static_cast<Eigen::Index>(kept_w.size()));
      w /= w.sum();
    }
  }

  MaggingSolution sol;
  sol.alpha = full_weights();
  sol.iterations = iterations;
  sol.kkt_residual = simplex_kkt_residual(gram, sol.alpha);
  if (!converged && sol.kkt_residual > tol) {
    throw ConvergenceError("simplex QP did not converge in " + std::to_string(cap) + " iterations",
                           sol.alpha, sol.kkt_residual);
  }
  sol.M = B * sol.alpha;
  sol.objective = sol.M.dot(Sigma * sol.M);
  sol.active = active_set(sol);

  if (sol.active.size() <= 1) {
    sol.unique_weights = true;
  } else {
    MatrixXd act(p, static_cast<Eigen::Index>(sol.active.size()));
    for (std::size_t i = 0; i < sol.active.size(); ++i) act.col(static_cast<Eigen::Index>(i)) = C.col(sol.active[i]);
    Eigen::JacobiSVD<MatrixXd> svd(column_differences(act));
    svd.setThreshold(kRankTolerance);
    sol.unique_weights = svd.rank() == static_cast<Eigen::Index>(sol.active.size()) - 1;
  }
  return sol;
}

VectorXd brute_force_oracle(const MatrixXd& B, const MatrixXd& Sigma) {
  const Eigen::Index G = B.cols();
  if (G < 1) throw DimensionError("brute_force_oracle needs at least one column");
  if (G > 15) throw SizeError("brute_force_oracle supports at most 15 groups");
  if (Sigma.rows() != B.rows() || Sigma.cols() != B.rows()) throw DimensionError("Sigma must be p x p");
  require_positive_definite(Sigma, "Sigma");

  VectorXd best;
  double best_norm = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << G); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index g = 0; g < G; ++g)
      if (mask & (1u << g)) idx.push_back(g);
    const Eigen::Index k = static_cast<Eigen::Index>(idx.size());
    VectorXd weights(k);
    if (k == 1) {
      weights(0) = 1.0;
    } else {
      // b = b_ref + D t, minimize (b_ref + D t)^T Sigma (b_ref + D t).
      MatrixXd diffs(B.rows(), k - 1);
      for (Eigen::Index i = 1; i < k; ++i) diffs.col(i - 1) = B.col(idx[i]) - B.col(idx[0]);
      const MatrixXd gram = diffs.transpose() * Sigma * diffs;
      const VectorXd t = -pinv_symmetric(gram) * (diffs.transpose() * Sigma * B.col(idx[0]));
      weights(0) = 1.0 - t.sum();
      weights.tail(k - 1) = t;
    }
    if (weights.minCoeff() < -1e-10) continue;
    VectorXd point = VectorXd::Zero(B.rows());
    for (Eigen::Index i = 0; i < k; ++i) point += weights(i) * B.col(idx[i]);
    const double norm = point.dot(Sigma * point);
    if (norm < best_norm) {
      best_norm = norm;
      best = point;
    }
  }
  return best;
}

double explained_variance(const VectorXd& b, const VectorXd& b_g, const MatrixXd& Sigma) {
  return 2.0 * b.dot(Sigma * b_g) - b.dot(Sigma * b);
}

std::vector<int> active_set(const MaggingSolution& solution, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("activity threshold must lie in (0, 1)");
  std::vector<int> out;
  for (Eigen::Index g = 0; g < solution.alpha.size(); ++g) {
    if (solution.alpha(g) > threshold) out.push_back(static_cast<int>(g));
  }
  return out;
}

}  // namespace maximin

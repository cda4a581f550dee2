#include "maximin/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maximin/confidence.hpp"
#include "maximin/errors.hpp"
#include "maximin/geometry.hpp"
#include "maximin/linalg.hpp"
#include "maximin/magging.hpp"

namespace maximin {

NormGap maximin_norm_gap(const MatrixXd& B, const MatrixXd& B_prime, const MatrixXd& Sigma0) {
  if (B.rows() != B_prime.rows() || B.cols() != B_prime.cols()) {
    throw DimensionError("maximin_norm_gap needs equally shaped matrices");
  }
  const SigmaMetric metric(Sigma0);
  const double a = std::sqrt(std::max(0.0, maximin_point(B, Sigma0).objective));
  const double b = std::sqrt(std::max(0.0, maximin_point(B_prime, Sigma0).objective));
  NormGap out;
  out.gap = std::abs(b - a);
  for (Eigen::Index g = 0; g < B.cols(); ++g) {
    out.bound = std::max(out.bound, metric.norm(B_prime.col(g) - B.col(g)));
  }
  return out;
}

bool GroupBox::contains(const VectorXd& b) const {
  const VectorXd d = b - center;
  return d.dot(gram * d) <= threshold;
}

bool GroupBoxes::contains(const MatrixXd& B) const {
  if (static_cast<std::size_t>(B.cols()) != boxes.size()) throw DimensionError("group count mismatch");
  for (std::size_t g = 0; g < boxes.size(); ++g) {
    if (!boxes[g].contains(B.col(static_cast<Eigen::Index>(g)))) return false;
  }
  return true;
}

GroupBoxes group_confidence_boxes(const GroupEstimates& estimates, double alpha,
                                  const std::optional<std::vector<double>>& weights) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const int G = estimates.groups();
  const int p = estimates.p();
  if (static_cast<int>(estimates.Sigma_g_hat.size()) != G) {
    throw DimensionError("per-group covariances are required");
  }
  std::vector<double> share(static_cast<std::size_t>(G), 1.0);
  if (weights) {
    if (static_cast<int>(weights->size()) != G) throw DimensionError("one weight per group required");
    share = *weights;
    for (double w : share) {
      if (!(w > 0.0)) throw DomainError("allocation weights must be positive");
    }
  }
  const double total = std::accumulate(share.begin(), share.end(), 0.0);

  GroupBoxes out;
  out.alpha = alpha;
  for (int g = 0; g < G; ++g) {
    const double alpha_g = alpha * share[static_cast<std::size_t>(g)] / total;
    GroupBox box;
    box.center = estimates.Bhat.col(g);
    box.gram = estimates.n * estimates.Sigma_g_hat[static_cast<std::size_t>(g)];
    box.level = 1.0 - alpha_g;
    box.threshold = estimates.sigma2_hat * chi2_quantile(p, box.level);
    const MatrixXd inv = box.gram.ldlt().solve(MatrixXd::Identity(p, p));
    box.half_widths = (box.threshold * inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
    out.boxes.push_back(std::move(box));
  }
  return out;
}

MatrixXd CoveringRegion::center(std::size_t k) const {
  MatrixXd b(p, G);
  for (int g = G - 1; g >= 0; --g) {
    for (int i = p - 1; i >= 0; --i) {
      const auto& axis = nodes[static_cast<std::size_t>(g * p + i)];
      b(i, g) = axis[k % axis.size()];
      k /= axis.size();
    }
  }
  return b;
}

double CoveringRegion::shell_lower() const {
  double lo = INFINITY;
  for (std::size_t k = 0; k < shell_radii.size(); ++k) lo = std::min(lo, shell_radii[k] - radii[k]);
  return std::max(0.0, lo);
}

double CoveringRegion::shell_upper() const {
  double hi = 0.0;
  for (std::size_t k = 0; k < shell_radii.size(); ++k) hi = std::max(hi, shell_radii[k] + radii[k]);
  return hi;
}

CoveringRegion covering_region(const GroupBoxes& boxes, const MatrixXd& Sigma0, double target_eps) {
  if (!(target_eps > 0.0)) throw DomainError("target_eps must be positive");
  if (boxes.boxes.empty()) throw DimensionError("covering_region needs at least one box");
  const int G = static_cast<int>(boxes.boxes.size());
  const int p = static_cast<int>(boxes.boxes.front().center.size());
  if (Sigma0.rows() != p || Sigma0.cols() != p) throw DimensionError("Sigma0 must be p x p");
  require_positive_definite(Sigma0, "Sigma0");

  // A lattice cell with per-coordinate half-spacing h has Sigma0-radius at
  // most sqrt(lambda_max p) h; pick h so that this is target_eps.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(Sigma0), Eigen::EigenvaluesOnly);
  const double half_spacing = target_eps / std::sqrt(eig.eigenvalues().maxCoeff() * p);

  CoveringRegion region;
  region.Sigma0 = Sigma0;
  region.p = p;
  region.G = G;
  region.level = 1.0 - boxes.alpha;
  double count = 1.0;
  for (int g = 0; g < G; ++g) {
    const GroupBox& box = boxes.boxes[static_cast<std::size_t>(g)];
    for (int i = 0; i < p; ++i) {
      const double width = 2.0 * box.half_widths(i);
      const int m = std::max(1, static_cast<int>(std::ceil(width / (2.0 * half_spacing) - 1e-12)));
      count *= m;
      if (count > kMaxCoveringCenters) {
        throw SizeError("covering lattice exceeds the center budget; increase target_eps");
      }
      std::vector<double> axis(static_cast<std::size_t>(m));
      const double lo = box.center(i) - box.half_widths(i);
      for (int j = 0; j < m; ++j) axis[static_cast<std::size_t>(j)] = lo + (j + 0.5) * width / m;
      region.nodes.push_back(std::move(axis));
    }
  }

  const auto pieces = static_cast<std::size_t>(count);
  region.radii.assign(pieces, target_eps);
  region.shell_radii.resize(pieces);
  for (std::size_t k = 0; k < pieces; ++k) {
    region.shell_radii[k] = std::sqrt(std::max(0.0, maximin_point(region.center(k), Sigma0).objective));
  }
  return region;
}

double hull_distance(const MatrixXd& B, const VectorXd& M, const MatrixXd& Sigma0) {
  const MatrixXd shifted = B.colwise() - M;
  return std::sqrt(std::max(0.0, maximin_point(shifted, Sigma0).objective));
}

bool contains_relaxed(const CoveringRegion& region, const VectorXd& M) {
  if (M.size() != region.p) throw DimensionError("point dimension mismatch");
  const double norm = std::sqrt(std::max(0.0, M.dot(region.Sigma0 * M)));
  constexpr double slack = 1e-10;
  for (std::size_t k = 0; k < region.piece_count(); ++k) {
    const double eps = region.radii[k];
    if (std::abs(norm - region.shell_radii[k]) > eps + slack) continue;
    if (hull_distance(region.center(k), M, region.Sigma0) <= eps + slack) return true;
  }
  return false;
}

}  // namespace maximin

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "maximin/linmodel.hpp"

namespace maximin {

struct NormGap {
  double gap = 0.0;    // | ||M(B')|| - ||M(B)|| |, Sigma0-norms
  double bound = 0.0;  // max_g ||b'_g - b_g||_Sigma0
};

/// The maximin norm is 1-Lipschitz in the max-column Sigma0-norm, so
/// gap <= bound always holds.
NormGap maximin_norm_gap(const MatrixXd& B, const MatrixXd& B_prime, const MatrixXd& Sigma0);

/// Ellipsoid {b : (b - center)^T gram (b - center) <= threshold} for one
/// group's coefficient vector.
struct GroupBox {
  VectorXd center;
  MatrixXd gram;           // X_g^T X_g (jittered: n Sigma_g_hat)
  double threshold = 0.0;  // sigma2_hat * chi2_p quantile
  double level = 0.0;      // per-box coverage level
  VectorXd half_widths;    // axis-aligned bounding box half-widths

  bool contains(const VectorXd& b) const;
};

struct GroupBoxes {
  std::vector<GroupBox> boxes;
  double alpha = 0.0;

  /// Joint event: every column of B inside its box.
  bool contains(const MatrixXd& B) const;
};

/// Per-group ellipsoids whose joint coverage is at least 1 - alpha by the
/// union bound. `weights` splits alpha across groups in proportion (equal
/// split by default).
GroupBoxes group_confidence_boxes(const GroupEstimates& estimates, double alpha,
                                  const std::optional<std::vector<double>>& weights = std::nullopt);

/// Union over lattice centers B^(k) of
///   {M : | ||M||_Sigma0 - ||M_Sigma0(B^(k))||_Sigma0 | <= eps_k}
///     intersected with CVX(eps_k-balls around the columns of B^(k)).
/// The lattice is the Cartesian product of per-(group, coordinate) node
/// lists; center k is decoded from its mixed-radix index.
struct CoveringRegion {
  MatrixXd Sigma0;
  int p = 0;
  int G = 0;
  // nodes[g * p + i] lists the lattice values of coordinate i of group g.
  std::vector<std::vector<double>> nodes;
  std::vector<double> radii;        // eps_k
  std::vector<double> shell_radii;  // ||M_Sigma0(B^(k))||_Sigma0
  double level = 0.0;

  std::size_t piece_count() const { return shell_radii.size(); }
  MatrixXd center(std::size_t k) const;
  double shell_lower() const;
  double shell_upper() const;
};

/// Maximum number of lattice centers covering_region will build.
inline constexpr double kMaxCoveringCenters = 1e6;

/// Axis-aligned lattice covering of the boxes' bounding boxes in which every
/// point is within target_eps (max-column Sigma0-norm) of a center. Throws
/// SizeError when the lattice would exceed kMaxCoveringCenters.
CoveringRegion covering_region(const GroupBoxes& boxes, const MatrixXd& Sigma0, double target_eps);

/// True iff some piece's shell condition holds and M lies within eps_k
/// (Sigma0-norm) of CVX(B^(k)); the latter by one simplex-QP solve.
bool contains_relaxed(const CoveringRegion& region, const VectorXd& M);

/// Sigma0-distance from M to the convex hull of the columns of B.
double hull_distance(const MatrixXd& B, const VectorXd& M, const MatrixXd& Sigma0);

}  // namespace maximin

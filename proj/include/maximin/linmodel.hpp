#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace maximin {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct GroupData {
  MatrixXd design;   // n x p
  VectorXd response; // n
};

/// Grouped regression data Y_g = X_g b_g + eps_g. Every group has the same
/// sample count n and predictor count p.
class GroupedDataset {
 public:
  explicit GroupedDataset(std::vector<GroupData> groups);

  int groups() const { return static_cast<int>(groups_.size()); }
  int n() const { return n_; }
  int p() const { return p_; }
  const GroupData& group(int g) const { return groups_.at(static_cast<std::size_t>(g)); }

  /// Row-wise concatenation of all designs, (nG) x p.
  MatrixXd stacked_design() const;

  bool operator==(const GroupedDataset& other) const;

 private:
  std::vector<GroupData> groups_;
  int n_ = 0;
  int p_ = 0;
};

enum class CoefficientRule {
  BasisVectors,    // b_g = e_g (requires G <= p)
  SharedPlusNoise, // b_g = e_1 + z_g e_2, z_g ~ N(0,1) drawn from the seed
  Identical,       // b_g = e_1
  Custom,          // user-supplied p x G matrix
};

enum class DesignRule {
  SharedStandardNormal, // iid N(0,1) entries in every group
  PerGroupScale,        // group g has iid N(0, s_g^2) entries
};

struct ScenarioSpec {
  int p = 3;
  int G = 3;
  int n = 100;
  CoefficientRule coefficients = CoefficientRule::BasisVectors;
  MatrixXd custom_coefficients;      // used when coefficients == Custom
  DesignRule design = DesignRule::SharedStandardNormal;
  std::vector<double> group_scales;  // used when design == PerGroupScale
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  double ridge_jitter = 0.0;

  /// Throws DimensionError / DomainError on an inconsistent spec.
  void validate() const;
};

/// B^0 for the spec. Deterministic in (p, G, seed).
MatrixXd true_coefficients(const ScenarioSpec& spec);

/// Sigma^0 = E[x x^T] of the generating design, plus the ridge jitter on the
/// diagonal (the quantity the jittered sample covariance estimates).
MatrixXd population_covariance(const ScenarioSpec& spec);

struct GeneratedData {
  GroupedDataset data;
  MatrixXd true_B;
};

/// Draws one dataset. Group g uses its own sub-stream of the seed, so the
/// result does not depend on the order in which groups are generated.
GeneratedData generate(const ScenarioSpec& spec);

struct GroupEstimates {
  MatrixXd Bhat;                    // p x G
  MatrixXd Sigma_hat;               // pooled (nG)^{-1} X^T X + jitter Id
  std::vector<MatrixXd> Sigma_g_hat;// n^{-1} X_g^T X_g + jitter Id
  double sigma2_hat = 0.0;
  // True when p >= n and the residual sum was divided by G n instead of
  // G (n - p).
  bool sigma2_approximate = false;
  double ridge_jitter_used = 0.0;
  int n = 0;

  int p() const { return static_cast<int>(Bhat.rows()); }
  int groups() const { return static_cast<int>(Bhat.cols()); }
};

/// Per-group least squares (ridge when jitter > 0), pooled covariance and
/// noise variance. Throws SingularityError naming the group when X_g^T X_g
/// is singular and jitter == 0.
GroupEstimates fit(const GroupedDataset& data, double ridge_jitter = 0.0);

/// Plain average of the per-group estimates.
VectorXd bagging(const GroupEstimates& estimates);

}  // namespace maximin

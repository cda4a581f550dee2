#include "maximin/linmodel.hpp"

#include <string>

#include "maximin/errors.hpp"
#include "maximin/linalg.hpp"
#include "maximin/rng.hpp"

namespace maximin {

GroupedDataset::GroupedDataset(std::vector<GroupData> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw DimensionError("dataset needs at least one group");
  n_ = static_cast<int>(groups_.front().design.rows());
  p_ = static_cast<int>(groups_.front().design.cols());
  if (n_ < 1 || p_ < 1) throw DimensionError("dataset needs n >= 1 and p >= 1");
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& grp = groups_[g];
    if (grp.design.rows() != n_ || grp.design.cols() != p_ || grp.response.size() != n_) {
      throw DimensionError("group " + std::to_string(g) +
                           " does not match the shared n x p shape");
    }
  }
}

MatrixXd GroupedDataset::stacked_design() const {
  MatrixXd x(static_cast<Eigen::Index>(n_) * groups(), p_);
  for (int g = 0; g < groups(); ++g) x.middleRows(static_cast<Eigen::Index>(g) * n_, n_) = group(g).design;
  return x;
}

bool GroupedDataset::operator==(const GroupedDataset& other) const {
  if (groups() != other.groups() || n_ != other.n_ || p_ != other.p_) return false;
  for (int g = 0; g < groups(); ++g) {
    if (group(g).design != other.group(g).design) return false;
    if (group(g).response != other.group(g).response) return false;
  }
  return true;
}

void ScenarioSpec::validate() const {
  if (p < 1 || G < 1 || n < 1) throw DimensionError("scenario needs p, G, n >= 1");
  if (!(noise_sd > 0.0)) throw DomainError("noise_sd must be positive");
  if (!(ridge_jitter >= 0.0)) throw DomainError("ridge_jitter must be nonnegative");
  switch (coefficients) {
    case CoefficientRule::BasisVectors:
      if (G > p) throw DimensionError("basis-vector coefficients need G <= p");
      break;
    case CoefficientRule::SharedPlusNoise:
      if (p < 2) throw DimensionError("shared-plus-noise coefficients need p >= 2");
      break;
    case CoefficientRule::Identical:
      break;
    case CoefficientRule::Custom:
      if (custom_coefficients.rows() != p || custom_coefficients.cols() != G) {
        throw DimensionError("custom coefficient matrix must be p x G");
      }
      break;
  }
  if (design == DesignRule::PerGroupScale) {
    if (static_cast<int>(group_scales.size()) != G) {
      throw DimensionError("per-group design needs one scale per group");
    }
    for (double s : group_scales) {
      if (!(s > 0.0)) throw DomainError("group scales must be positive");
    }
  }
}

MatrixXd true_coefficients(const ScenarioSpec& spec) {
  spec.validate();
  MatrixXd b = MatrixXd::Zero(spec.p, spec.G);
  switch (spec.coefficients) {
    case CoefficientRule::BasisVectors:
      for (int g = 0; g < spec.G; ++g) b(g, g) = 1.0;
      break;
    case CoefficientRule::SharedPlusNoise: {
      CounterRng rng = CounterRng(spec.seed).substream(0);
      for (int g = 0; g < spec.G; ++g) {
        b(0, g) = 1.0;
        b(1, g) = rng.normal();
      }
      break;
    }
    case CoefficientRule::Identical:
      b.row(0).setOnes();
      break;
    case CoefficientRule::Custom:
      b = spec.custom_coefficients;
      break;
  }
  return b;
}

MatrixXd population_covariance(const ScenarioSpec& spec) {
  spec.validate();
  double scale = 1.0;
  if (spec.design == DesignRule::PerGroupScale) {
    scale = 0.0;
    for (double s : spec.group_scales) scale += s * s;
    scale /= spec.G;
  }
  return (scale + spec.ridge_jitter) * MatrixXd::Identity(spec.p, spec.p);
}

GeneratedData generate(const ScenarioSpec& spec) {
  MatrixXd b0 = true_coefficients(spec);
  const CounterRng root(spec.seed);
  std::vector<GroupData> groups(static_cast<std::size_t>(spec.G));
  for (int g = 0; g < spec.G; ++g) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(g) + 1);
    const double scale =
        spec.design == DesignRule::PerGroupScale ? spec.group_scales[static_cast<std::size_t>(g)] : 1.0;
    GroupData& grp = groups[static_cast<std::size_t>(g)];
    grp.design.resize(spec.n, spec.p);
    // Row-major fill order so that a row is one draw of the design vector.
    for (int i = 0; i < spec.n; ++i)
      for (int j = 0; j < spec.p; ++j) grp.design(i, j) = scale * rng.normal();
    grp.response = grp.design * b0.col(g);
    for (int i = 0; i < spec.n; ++i) grp.response(i) += spec.noise_sd * rng.normal();
  }
  return {GroupedDataset(std::move(groups)), std::move(b0)};
}

GroupEstimates fit(const GroupedDataset& data, double ridge_jitter) {
  if (!(ridge_jitter >= 0.0)) throw DomainError("ridge_jitter must be nonnegative");
  const int n = data.n();
  const int p = data.p();
  const int groups = data.groups();
  const MatrixXd id = MatrixXd::Identity(p, p);

  GroupEstimates est;
  est.Bhat.resize(p, groups);
  est.Sigma_hat = MatrixXd::Zero(p, p);
  est.ridge_jitter_used = ridge_jitter;
  est.n = n;
  double rss = 0.0;

  for (int g = 0; g < groups; ++g) {
    const auto& grp = data.group(g);
    const MatrixXd gram = grp.design.transpose() * grp.design;
    const MatrixXd normal = gram + n * ridge_jitter * id;
    Eigen::LDLT<MatrixXd> ldlt(normal);
    const VectorXd pivots = ldlt.vectorD();
    const double top = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(top > 0.0) || pivots.minCoeff() <= kRankTolerance * top) {
      throw SingularityError("X^T X of group " + std::to_string(g) + " is singular", g);
    }
    est.Bhat.col(g) = ldlt.solve(grp.design.transpose() * grp.response);
    est.Sigma_hat += gram;
    est.Sigma_g_hat.push_back(gram / n + ridge_jitter * id);
    rss += (grp.response - grp.design * est.Bhat.col(g)).squaredNorm();
  }
  est.Sigma_hat = symmetrized(est.Sigma_hat / (static_cast<double>(n) * groups)) + ridge_jitter * id;

  if (p < n) {
    est.sigma2_hat = rss / (static_cast<double>(groups) * (n - p));
  } else {
    est.sigma2_hat = rss / (static_cast<double>(groups) * n);
    est.sigma2_approximate = true;
  }
  return est;
}

VectorXd bagging(const GroupEstimates& estimates) {
  return estimates.Bhat.rowwise().mean();
}

}  // namespace maximin

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "maximin/geometry.hpp"
#include "maximin/linmodel.hpp"
#include "maximin/magging.hpp"

namespace maximin {

struct AsymptoticCovariance {
  MatrixXd W;       // term_B + term_V
  MatrixXd term_B;  // sigma^2 sum_g J_g Sigma^{-1} J_g^T
  MatrixXd term_V;  // covariance added by estimating Sigma
  MatrixXd C_hat;
  double sigma2_used = 0.0;
  std::vector<int> active_used;
  bool vertex_mode = false;  // |A| = 1: W = sigma^2 Sigma^{-1}
  bool known_sigma = false;  // Sigma supplied, term_V = 0
};

/// Covariance (divisor nG) of the nG vectors G^{-1/2} x_k (x_k^T M), x_k the
/// rows of the stacked design X.
MatrixXd empirical_C(const MatrixXd& X, const VectorXd& M, int G);

/// P C P with P = D (D^T Sigma D)^{-1} D^T over the active columns. Zero for
/// a single active column.
MatrixXd sigma_term_V(const MatrixXd& B_active, const SigmaMetric& metric, const MatrixXd& C_hat);

struct CovarianceOptions {
  /// Replaces the estimated noise variance.
  std::optional<double> sigma2;
  /// Known population covariance. When set, magging and W use it in place of
  /// the pooled sample covariance and term_V is zero.
  std::optional<MatrixXd> known_sigma;
};

/// W = sigma^2 sum_{g in A} J_g Sigma^{-1} J_g^T + V from its parts. In
/// vertex mode (|A| = 1) `differentials` is ignored and
/// W = sigma^2 Sigma^{-1}.
AsymptoticCovariance assemble_W(const GroupEstimates& estimates, const MaggingSolution& solution,
                                const MaggingDifferential& differentials, const MatrixXd& C_hat,
                                const CovarianceOptions& options = {});

/// End-to-end plug-in W: solves magging on (Bhat, Sigma), differentiates,
/// builds C_hat from the stacked design and assembles. Propagates
/// DegeneracyError / RankError from the geometry.
struct PluginResult {
  MaggingSolution solution;
  AsymptoticCovariance covariance;
};
PluginResult plugin_covariance(const GroupEstimates& estimates, const MatrixXd& stacked_design,
                               const CovarianceOptions& options = {});

/// Population W(B^0, Sigma^0) for a centered Gaussian design, using the
/// closed form Cov(x x^T M) = (M^T Sigma M) Sigma + Sigma M M^T Sigma.
AsymptoticCovariance population_covariance_gaussian(const MatrixXd& B0, const MatrixXd& Sigma0,
                                                    double sigma2, bool known_sigma = false);

namespace reference {

/// c_{ijkl} = G^{-1} E[(x_i x_j - S_ij)(x_k x_l - S_kl)] estimated from the
/// rows of X, stored flat as c[((i p + j) p + k) p + l]. Only for p <= 4.
std::vector<double> fourth_moment_tensor(const MatrixXd& X, int G);

/// C_ij = sum_{k,l} M_k M_l c_{iklj}.
MatrixXd contract_fourth_moment(const std::vector<double>& c, const VectorXd& M);

}  // namespace reference

}  // namespace maximin

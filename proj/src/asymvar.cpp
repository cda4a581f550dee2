#include "maximin/asymvar.hpp"

#include <cmath>

#include "maximin/errors.hpp"
#include "maximin/linalg.hpp"

namespace maximin {

MatrixXd empirical_C(const MatrixXd& X, const VectorXd& M, int G) {
  if (X.cols() != M.size()) throw DimensionError("empirical_C: X and M disagree on p");
  if (G < 1) throw DimensionError("empirical_C needs G >= 1");
  const Eigen::Index rows = X.rows();
  if (rows < 2) throw DimensionError("empirical_C needs at least two rows");
  const VectorXd fitted = X * M;
  MatrixXd v = X.array().colwise() * fitted.array();
  v /= std::sqrt(static_cast<double>(G));
  const Eigen::RowVectorXd mean = v.colwise().mean();
  v.rowwise() -= mean;
  return symmetrized(v.transpose() * v / static_cast<double>(rows));
}

MatrixXd sigma_term_V(const MatrixXd& B_active, const SigmaMetric& metric, const MatrixXd& C_hat) {
  const MatrixXd op = hull_span_operator(B_active, metric);
  return symmetrized(op * C_hat * op);
}

AsymptoticCovariance assemble_W(const GroupEstimates& estimates, const MaggingSolution& solution,
                                const MaggingDifferential& differentials, const MatrixXd& C_hat,
                                const CovarianceOptions& options) {
  const int p = estimates.p();
  const MatrixXd sigma = options.known_sigma ? *options.known_sigma : estimates.Sigma_hat;
  const SigmaMetric metric(sigma);

  AsymptoticCovariance out;
  out.sigma2_used = options.sigma2 ? *options.sigma2 : estimates.sigma2_hat;
  if (!(out.sigma2_used >= 0.0)) throw DomainError("noise variance must be nonnegative");
  out.active_used = solution.active;
  out.known_sigma = options.known_sigma.has_value();
  out.C_hat = C_hat;

  if (solution.active.size() == 1) {
    out.vertex_mode = true;
    out.term_B = out.sigma2_used * metric.inverse();
    out.term_V = MatrixXd::Zero(p, p);
    out.W = out.term_B;
    return out;
  }
  if (solution.active.empty()) throw DegeneracyError("empty active set");
  if (differentials.dB.size() != solution.active.size()) {
    throw DimensionError("differentials do not match the active set");
  }

  out.term_B = MatrixXd::Zero(p, p);
  for (const MatrixXd& jac : differentials.dB) out.term_B += jac * metric.inverse() * jac.transpose();
  out.term_B = symmetrized(out.sigma2_used * out.term_B);

  if (out.known_sigma) {
    out.term_V = MatrixXd::Zero(p, p);
  } else {
    out.term_V = sigma_term_V(select_columns(estimates.Bhat, solution.active), metric, C_hat);
  }
  out.W = out.term_B + out.term_V;
  return out;
}

PluginResult plugin_covariance(const GroupEstimates& estimates, const MatrixXd& stacked_design,
                               const CovarianceOptions& options) {
  const MatrixXd sigma = options.known_sigma ? *options.known_sigma : estimates.Sigma_hat;
  const SigmaMetric metric(sigma);
  PluginResult out;
  out.solution = maximin_point(estimates.Bhat, sigma);
  MaggingDifferential diff;
  if (out.solution.active.size() > 1) diff = differentiate(estimates.Bhat, metric, out.solution);
  MatrixXd c_hat = MatrixXd::Zero(estimates.p(), estimates.p());
  if (!options.known_sigma) c_hat = empirical_C(stacked_design, out.solution.M, estimates.groups());
  out.covariance = assemble_W(estimates, out.solution, diff, c_hat, options);
  return out;
}

AsymptoticCovariance population_covariance_gaussian(const MatrixXd& B0, const MatrixXd& Sigma0,
                                                    double sigma2, bool known_sigma) {
  const SigmaMetric metric(Sigma0);
  const MaggingSolution sol = maximin_point(B0, Sigma0);
  GroupEstimates pop;
  pop.Bhat = B0;
  pop.Sigma_hat = Sigma0;
  pop.sigma2_hat = sigma2;
  const VectorXd sm = Sigma0 * sol.M;
  const MatrixXd c =
      (sol.M.dot(sm) * Sigma0 + sm * sm.transpose()) / static_cast<double>(B0.cols());
  MaggingDifferential diff;
  if (sol.active.size() > 1) diff = differentiate(B0, metric, sol);
  CovarianceOptions opts;
  if (known_sigma) opts.known_sigma = Sigma0;
  return assemble_W(pop, sol, diff, c, opts);
}

namespace reference {

std::vector<double> fourth_moment_tensor(const MatrixXd& X, int G) {
  const Eigen::Index p = X.cols();
  if (p > 4) throw SizeError("rank-4 reference tensor is limited to p <= 4");
  const Eigen::Index rows = X.rows();
  const MatrixXd s = X.transpose() * X / static_cast<double>(rows);
  std::vector<double> c(static_cast<std::size_t>(p * p * p * p), 0.0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) {
        const double a = X(r, i) * X(r, j) - s(i, j);
        for (Eigen::Index k = 0; k < p; ++k)
          for (Eigen::Index l = 0; l < p; ++l) {
            c[static_cast<std::size_t>(((i * p + j) * p + k) * p + l)] += a * (X(r, k) * X(r, l) - s(k, l));
          }
      }
  }
  for (double& v : c) v /= static_cast<double>(rows) * G;
  return c;
}

MatrixXd contract_fourth_moment(const std::vector<double>& c, const VectorXd& M) {
  const Eigen::Index p = M.size();
  MatrixXd out = MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index l = 0; l < p; ++l)
          out(i, j) += M(k) * M(l) * c[static_cast<std::size_t>(((i * p + k) * p + l) * p + j)];
  return out;
}

}  // namespace reference

}  // namespace maximin

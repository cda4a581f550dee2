#include "maximin/corpus.hpp"

#include <algorithm>

#include "maximin/errors.hpp"
#include "maximin/geometry.hpp"
#include "maximin/rng.hpp"

namespace maximin {

Instance random_instance(std::uint64_t seed, int p, int G) {
  CounterRng rng(seed, 0x5eed);
  Instance inst;
  VectorXd offset(p);
  for (int i = 0; i < p; ++i) offset(i) = 1.5 * rng.normal();
  inst.B.resize(p, G);
  for (int g = 0; g < G; ++g)
    for (int i = 0; i < p; ++i) inst.B(i, g) = offset(i) + rng.normal();
  MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  inst.Sigma = a * a.transpose() / p + 0.5 * MatrixXd::Identity(p, p);
  return inst;
}

std::optional<Instance> well_separated_instance(std::uint64_t seed, int p, int G, int attempts) {
  for (int t = 0; t < attempts; ++t) {
    Instance inst = random_instance(hash_combine(seed, static_cast<std::uint64_t>(t)), p, G);
    try {
      const MaggingSolution sol = maximin_point(inst.B, inst.Sigma);
      if (sol.active.size() < 2 || !sol.unique_weights) continue;
      bool ok = true;
      for (int g : sol.active) ok = ok && sol.alpha(g) >= 0.05;
      if (!ok) continue;
      const SigmaMetric metric(inst.Sigma);
      const double m_norm = metric.norm(sol.M);
      if (m_norm < 0.1) continue;
      // Inactive columns must stay strictly outside the supporting hyperplane.
      for (int g = 0; g < G && ok; ++g) {
        if (std::find(sol.active.begin(), sol.active.end(), g) != sol.active.end()) continue;
        const double slack = metric.inner(sol.M, inst.B.col(g) - sol.M);
        ok = slack >= 0.05 * m_norm * metric.norm(inst.B.col(g) - sol.M);
      }
      if (!ok) continue;
      const MatrixXd active = select_columns(inst.B, sol.active);
      for (Eigen::Index g = 0; g < active.cols() && ok; ++g) {
        MatrixXd others(p, active.cols() - 1);
        for (Eigen::Index i = 0, j = 0; i < active.cols(); ++i)
          if (i != g) others.col(j++) = active.col(i);
        ok = metric.norm(active.col(g) - affine_project(active.col(g), others, metric)) >= 0.1;
      }
      if (ok) return inst;
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

VectorXd magging_fd_column(const MatrixXd& B, const MatrixXd& Sigma, int g, const VectorXd& E,
                           double h) {
  MatrixXd plus = B;
  MatrixXd minus = B;
  plus.col(g) += h * E;
  minus.col(g) -= h * E;
  return (maximin_point(plus, Sigma).M - maximin_point(minus, Sigma).M) / (2.0 * h);
}

VectorXd magging_fd_sigma(const MatrixXd& B, const MatrixXd& Sigma, const MatrixXd& Delta, double h) {
  return (maximin_point(B, Sigma + h * Delta).M - maximin_point(B, Sigma - h * Delta).M) / (2.0 * h);
}

}  // namespace maximin

#include "maximin/confidence.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "maximin/errors.hpp"
#include "maximin/linalg.hpp"

namespace maximin {

namespace {

constexpr double kMaxCondition = 1e12;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by the modified Lentz continued fraction.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_density(int dof, double x) {
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * dof;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - std::lgamma(k));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("regularized_gamma_p needs a > 0");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double chi2_cdf(int dof, double x) {
  if (dof < 1) throw DomainError("chi-square degrees of freedom must be >= 1");
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double prob) {
  if (dof < 1) throw DomainError("chi-square degrees of freedom must be >= 1");
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("probability must lie in (0, 1)");

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (chi2_cdf(dof, hi) < prob) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = chi2_cdf(dof, x) - prob;
    if (std::abs(f) < 1e-15) break;
    if (f < 0.0) lo = x; else hi = x;
    const double dens = chi2_density(dof, x);
    double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

VectorXd ConfidenceRegion::semi_axes() const {
  // Axis i of {d : d^T W^{-1} d <= tau/n} has length sqrt(lambda_i(W) tau/n),
  // and eigenvalues already holds lambda(W)/n.
  return (eigenvalues * (radius2 * n_used)).cwiseSqrt();
}

double ConfidenceRegion::volume() const {
  const double p = static_cast<double>(p_used);
  const double unit_ball = std::pow(std::numbers::pi, 0.5 * p) / std::tgamma(0.5 * p + 1.0);
  return unit_ball * semi_axes().prod();
}

ConfidenceRegion build_region(const VectorXd& M_hat, const MatrixXd& W, int n, double alpha) {
  const Eigen::Index p = M_hat.size();
  if (W.rows() != p || W.cols() != p) throw DimensionError("W must be p x p");
  if (n < 1) throw DimensionError("build_region needs n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!W.allFinite()) throw ConditioningError("W has non-finite entries", VectorXd());

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(W));
  const VectorXd lambda = eig.eigenvalues();
  const double top = lambda(p - 1);
  if (!(lambda(0) > 0.0) || top / lambda(0) > kMaxCondition) {
    throw ConditioningError("asymptotic covariance is singular or ill-conditioned", lambda);
  }
  const MatrixXd& vecs = eig.eigenvectors();

  ConfidenceRegion r;
  r.center = M_hat;
  r.precision = symmetrized(vecs * lambda.cwiseInverse().asDiagonal() * vecs.transpose());
  r.level = 1.0 - alpha;
  r.n_used = n;
  r.p_used = static_cast<int>(p);
  r.radius2 = chi2_quantile(static_cast<int>(p), 1.0 - alpha) / n;
  r.eigenvalues = lambda / static_cast<double>(n);
  r.axes = vecs;
  return r;
}

ConfidenceRegion build_region(const VectorXd& M_hat, const AsymptoticCovariance& W, int n,
                              double alpha) {
  ConfidenceRegion r = build_region(M_hat, W.W, n, alpha);
  r.vertex_mode = W.vertex_mode;
  r.known_sigma = W.known_sigma;
  return r;
}

Membership contains(const ConfidenceRegion& region, const VectorXd& M) {
  if (M.size() != region.center.size()) throw DimensionError("point dimension mismatch");
  const VectorXd d = region.center - M;
  Membership out;
  out.value = d.dot(region.precision * d);
  out.inside = out.value <= region.radius2;
  return out;
}

double max_eigenvalue(const MatrixXd& W) {
  if (W.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(W), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double max_eigenvalue(const AsymptoticCovariance& W) { return max_eigenvalue(W.W); }

}  // namespace maximin

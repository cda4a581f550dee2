#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace maximin {

// Base for every error raised by the library. Callers that only care about
// success/failure can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

/// A per-group normal-equation matrix could not be factorized.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, int group)
      : Error(what), group_(group) {}
  int group() const { return group_; }

 private:
  int group_;
};

class DefinitenessError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

/// Geometry where the magging map is not differentiable.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// The simplex QP hit its iteration cap. Carries the best iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd best_weights,
                   double kkt_residual)
      : Error(what),
        best_weights_(std::move(best_weights)),
        kkt_residual_(kkt_residual) {}
  const Eigen::VectorXd& best_weights() const { return best_weights_; }
  double kkt_residual() const { return kkt_residual_; }

 private:
  Eigen::VectorXd best_weights_;
  double kkt_residual_;
};

/// Covariance too ill-conditioned to invert. Carries its eigenvalues
/// (ascending) for diagnostics.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, Eigen::VectorXd eigenvalues)
      : Error(what), eigenvalues_(std::move(eigenvalues)) {}
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Eigen::VectorXd eigenvalues_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace maximin

#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "maximin/magging.hpp"

namespace maximin {

struct Instance {
  MatrixXd B;
  MatrixXd Sigma;
};

/// Random p x G coefficient matrix (columns scattered around a common
/// offset, so the origin is usually outside the hull) and a random
/// well-conditioned Sigma.
Instance random_instance(std::uint64_t seed, int p, int G);

/// Instance inside the smooth region of the magging map: at least two active
/// groups with unique weights, every active weight >= 0.05, every
/// ||(Id - PA_g) b_g||_Sigma >= 0.1, and inactive groups strictly off the
/// supporting hyperplane. Tries successive derived seeds; nullopt if none of
/// `attempts` qualifies.
std::optional<Instance> well_separated_instance(std::uint64_t seed, int p, int G,
                                                int attempts = 200);

/// Central-difference derivative of the magging point along column g of B
/// in direction E.
VectorXd magging_fd_column(const MatrixXd& B, const MatrixXd& Sigma, int g, const VectorXd& E,
                           double h);

/// Central-difference derivative of the magging point along Sigma + h Delta.
VectorXd magging_fd_sigma(const MatrixXd& B, const MatrixXd& Sigma, const MatrixXd& Delta, double h);

}  // namespace maximin

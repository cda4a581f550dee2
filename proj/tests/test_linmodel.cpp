#include <doctest.h>

#include <algorithm>
#include <vector>

#include "maximin/errors.hpp"
#include "maximin/linalg.hpp"
#include "maximin/linmodel.hpp"
#include "maximin/rng.hpp"

using namespace maximin;

namespace {

ScenarioSpec basis_spec(int p, int n, std::uint64_t seed) {
  ScenarioSpec s;
  s.p = p;
  s.G = p;
  s.n = n;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("generate shapes and basis coefficients") {
  const ScenarioSpec s = basis_spec(3, 10, 7);
  const GeneratedData d = generate(s);
  CHECK(d.data.groups() == 3);
  CHECK(d.data.n() == 10);
  CHECK(d.data.p() == 3);
  CHECK(d.data.group(0).design.rows() == 10);
  CHECK(d.data.group(0).design.cols() == 3);
  CHECK(d.true_B.isApprox(MatrixXd::Identity(3, 3)));
  CHECK(d.data.stacked_design().rows() == 30);
}

TEST_CASE("same seed gives identical data, different seed does not") {
  const ScenarioSpec s = basis_spec(4, 12, 99);
  CHECK(generate(s).data == generate(s).data);
  ScenarioSpec t = s;
  t.seed = 100;
  CHECK(!(generate(s).data == generate(t).data));
}

TEST_CASE("near-noiseless data interpolates") {
  ScenarioSpec s = basis_spec(3, 20, 5);
  s.noise_sd = 1e-12;
  const GeneratedData d = generate(s);
  for (int g = 0; g < 3; ++g) {
    const auto& grp = d.data.group(g);
    const VectorXd clean = grp.design * d.true_B.col(g);
    CHECK((grp.response - clean).norm() <= 1e-9 * clean.norm());
  }
  const GroupEstimates est = fit(d.data);
  for (int g = 0; g < 3; ++g) CHECK((est.Bhat.col(g) - d.true_B.col(g)).norm() <= 1e-8);
}

TEST_CASE("invalid specs are rejected") {
  ScenarioSpec s = basis_spec(3, 10, 1);
  s.noise_sd = 0.0;
  CHECK_THROWS_AS(generate(s), DomainError);
  s = basis_spec(3, 10, 1);
  s.ridge_jitter = -1.0;
  CHECK_THROWS_AS(generate(s), DomainError);
  s = basis_spec(3, 0, 1);
  CHECK_THROWS_AS(generate(s), DimensionError);
  s = basis_spec(3, 10, 1);
  s.G = 4;  // more basis vectors than predictors
  CHECK_THROWS(generate(s));
}

TEST_CASE("coefficient rules") {
  ScenarioSpec s = basis_spec(4, 10, 3);
  s.G = 3;
  s.coefficients = CoefficientRule::Identical;
  const MatrixXd id = true_coefficients(s);
  for (int g = 0; g < 3; ++g) CHECK(id.col(g).isApprox(VectorXd::Unit(4, 0)));

  s.coefficients = CoefficientRule::SharedPlusNoise;
  const MatrixXd sn = true_coefficients(s);
  CHECK(sn.row(0).isApprox(Eigen::RowVectorXd::Ones(3)));
  CHECK(sn.bottomRows(2).row(1).isZero());
  CHECK(sn.row(1).norm() > 0.0);
  CHECK(sn == true_coefficients(s));

  s.coefficients = CoefficientRule::Custom;
  s.custom_coefficients = MatrixXd::Constant(4, 3, 0.25);
  CHECK(true_coefficients(s) == s.custom_coefficients);
  s.custom_coefficients = MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(true_coefficients(s), DimensionError);
}

TEST_CASE("per-group scale design") {
  ScenarioSpec s = basis_spec(2, 4000, 11);
  s.design = DesignRule::PerGroupScale;
  s.group_scales = {1.0, 3.0};
  const GeneratedData d = generate(s);
  const double v0 = d.data.group(0).design.squaredNorm() / (4000.0 * 2);
  const double v1 = d.data.group(1).design.squaredNorm() / (4000.0 * 2);
  CHECK(v0 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(v1 == doctest::Approx(9.0).epsilon(0.05));
  const MatrixXd pop = population_covariance(s);
  CHECK(pop.isApprox(5.0 * MatrixXd::Identity(2, 2)));
}

TEST_CASE("fit singular without jitter, finite with jitter") {
  ScenarioSpec s = basis_spec(10, 5, 21);
  const GeneratedData d = generate(s);
  try {
    fit(d.data);
    FAIL("expected a singularity error");
  } catch (const SingularityError& e) {
    CHECK(e.group() == 0);
  }
  const GroupEstimates est = fit(d.data, 1e-4);
  CHECK(est.Bhat.allFinite());
  CHECK(est.sigma2_approximate);
  CHECK(est.sigma2_hat >= 0.0);
  CHECK(est.ridge_jitter_used == 1e-4);
}

TEST_CASE("fit formulas against direct solves") {
  ScenarioSpec s = basis_spec(3, 25, 8);
  const GeneratedData d = generate(s);
  const double jitter = 0.01;
  const GroupEstimates est = fit(d.data, jitter);
  double rss = 0.0;
  MatrixXd xtx = MatrixXd::Zero(3, 3);
  for (int g = 0; g < 3; ++g) {
    const auto& grp = d.data.group(g);
    const MatrixXd a = grp.design.transpose() * grp.design + 25 * jitter * MatrixXd::Identity(3, 3);
    const VectorXd b = a.inverse() * grp.design.transpose() * grp.response;
    CHECK((est.Bhat.col(g) - b).norm() < 1e-10);
    CHECK(est.Sigma_g_hat[static_cast<std::size_t>(g)].isApprox(a / 25.0));
    rss += (grp.response - grp.design * b).squaredNorm();
    xtx += grp.design.transpose() * grp.design;
  }
  CHECK(est.Sigma_hat.isApprox(xtx / 75.0 + jitter * MatrixXd::Identity(3, 3)));
  CHECK(est.sigma2_hat == doctest::Approx(rss / (3.0 * (25 - 3))));
  CHECK(!est.sigma2_approximate);
}

TEST_CASE("residuals are orthogonal to the design") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GeneratedData d = generate(basis_spec(4, 30, seed));
    const GroupEstimates est = fit(d.data);
    for (int g = 0; g < 4; ++g) {
      const auto& grp = d.data.group(g);
      const VectorXd r = grp.response - grp.design * est.Bhat.col(g);
      const VectorXd xr = grp.design.transpose() * r;
      const VectorXd xy = grp.design.transpose() * grp.response;
      CHECK(xr.lpNorm<Eigen::Infinity>() <= 1e-8 * xy.lpNorm<Eigen::Infinity>());
    }
    CHECK((est.Sigma_hat - est.Sigma_hat.transpose()).norm() == 0.0);
    CHECK(is_positive_definite(est.Sigma_hat));
  }
}

TEST_CASE("pooled covariance converges as n grows") {
  std::vector<double> medians;
  for (int n : {100, 1000, 10000}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ScenarioSpec s = basis_spec(3, n, 500 + seed);
      errs.push_back((fit(generate(s).data).Sigma_hat - MatrixXd::Identity(3, 3)).norm());
    }
    std::nth_element(errs.begin(), errs.begin() + 10, errs.end());
    medians.push_back(errs[10]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("bagging averages") {
  GroupEstimates est;
  est.Bhat = MatrixXd::Identity(2, 2);
  CHECK(bagging(est).isApprox(VectorXd::Constant(2, 0.5)));
  est.Bhat = MatrixXd::Identity(3, 3);
  CHECK(bagging(est).isApprox(VectorXd::Constant(3, 1.0 / 3)));
  est.Bhat = MatrixXd(2, 1);
  est.Bhat << 4, -1;
  CHECK(bagging(est) == est.Bhat.col(0));
}

TEST_CASE("dataset validation") {
  GroupData a{MatrixXd::Ones(3, 2), VectorXd::Ones(3)};
  GroupData b{MatrixXd::Ones(4, 2), VectorXd::Ones(4)};
  CHECK_THROWS_AS(GroupedDataset({a, b}), DimensionError);
  GroupData c{MatrixXd::Ones(3, 2), VectorXd::Ones(2)};
  CHECK_THROWS_AS(GroupedDataset({c}), DimensionError);
  CHECK_THROWS_AS(GroupedDataset({}), DimensionError);
}

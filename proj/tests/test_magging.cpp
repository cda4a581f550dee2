#include <doctest.h>

#include <algorithm>

#include "maximin/corpus.hpp"
#include "maximin/errors.hpp"
#include "maximin/geometry.hpp"
#include "maximin/magging.hpp"
#include "maximin/rng.hpp"

using namespace maximin;

namespace {

MatrixXd cols(std::initializer_list<std::initializer_list<double>> columns) {
  const auto G = static_cast<Eigen::Index>(columns.size());
  const auto p = static_cast<Eigen::Index>(columns.begin()->size());
  MatrixXd B(p, G);
  Eigen::Index g = 0;
  for (const auto& c : columns) {
    Eigen::Index i = 0;
    for (double v : c) B(i++, g) = v;
    ++g;
  }
  return B;
}

VectorXd random_simplex(CounterRng& rng, int G) {
  VectorXd w(G);
  for (int g = 0; g < G; ++g) w(g) = -std::log(rng.uniform());
  return w / w.sum();
}

}  // namespace

TEST_CASE("two orthogonal unit vectors meet at the midpoint") {
  const MaggingSolution s = maximin_point(cols({{1, 0}, {0, 1}}), MatrixXd::Identity(2, 2));
  CHECK(s.M.isApprox(VectorXd::Constant(2, 0.5)));
  CHECK(s.alpha.isApprox(VectorXd::Constant(2, 0.5)));
  CHECK(s.active == std::vector<int>{0, 1});
  CHECK(s.unique_weights);
  CHECK(s.objective == doctest::Approx(0.5));
}

TEST_CASE("origin inside the hull") {
  const MaggingSolution s = maximin_point(cols({{1, 0}, {-1, 0}}), MatrixXd::Identity(2, 2));
  CHECK(s.M.norm() < 1e-12);
}

TEST_CASE("nearest vertex on a ray") {
  const MaggingSolution s = maximin_point(cols({{2, 0}, {6, 0}}), MatrixXd::Identity(2, 2));
  CHECK(s.M.isApprox(VectorXd::Unit(2, 0) * 2));
  CHECK(s.active == std::vector<int>{0});
}

TEST_CASE("seeded random instance matches the oracle") {
  CounterRng rng(11);
  MatrixXd B(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int g = 0; g < 4; ++g) B(i, g) = rng.normal() + 1.0;
  const MatrixXd I = MatrixXd::Identity(3, 3);
  CHECK((maximin_point(B, I).M - brute_force_oracle(B, I)).norm() <= 1e-6);
}

TEST_CASE("oracle edge cases") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  const MatrixXd one = cols({{3, -1}});
  CHECK(brute_force_oracle(one, I) == one.col(0));
  const MatrixXd B = cols({{1, 2}, {2, 0.5}, {1.5, 1.5}});
  MatrixXd dup(2, 4);
  dup << B, B.col(1);
  CHECK((brute_force_oracle(dup, I) - brute_force_oracle(B, I)).norm() < 1e-12);
  CHECK((maximin_point(dup, I).M - maximin_point(B, I).M).norm() < 1e-10);
  CHECK_THROWS_AS(brute_force_oracle(MatrixXd::Ones(2, 16), I), SizeError);
}

TEST_CASE("duplicate columns report non-unique weights") {
  MatrixXd B(2, 3);
  B << 1, 0, 0,
       0, 1, 1;
  const MaggingSolution s = maximin_point(B, MatrixXd::Identity(2, 2));
  CHECK(s.M.isApprox(VectorXd::Constant(2, 0.5)));
  if (s.active.size() == 3) CHECK(!s.unique_weights);
}

TEST_CASE("non positive definite Sigma is refused") {
  MatrixXd S(2, 2);
  S << 1, 2, 2, 1;
  CHECK_THROWS_AS(maximin_point(MatrixXd::Identity(2, 2), S), DefinitenessError);
}

TEST_CASE("explained variance") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  VectorXd b(2);
  b << 1.5, -0.5;
  CHECK(explained_variance(b, b, I) == doctest::Approx(b.squaredNorm()));
  CHECK(explained_variance(VectorXd::Zero(2), b, I) == 0.0);
  CHECK(explained_variance(VectorXd::Unit(2, 0), VectorXd::Unit(2, 1), I) == -1.0);
}

TEST_CASE("active_set thresholds") {
  MaggingSolution s;
  s.alpha = VectorXd(3);
  s.alpha << 0.5, 0.5, 0.0;
  CHECK(active_set(s) == std::vector<int>{0, 1});
  s.alpha = VectorXd(2);
  s.alpha << 1.0, 1e-9;
  CHECK(active_set(s) == std::vector<int>{0});
  CHECK_THROWS_AS(active_set(s, 0.0), DomainError);
  CHECK_THROWS_AS(active_set(s, 1.5), DomainError);
}

TEST_CASE("basis-vector scenario activates every group equally") {
  for (int G = 2; G <= 6; ++G) {
    const MatrixXd I = MatrixXd::Identity(G, G);
    const MaggingSolution s = maximin_point(I, I);
    CHECK(static_cast<int>(s.active.size()) == G);
    CHECK(s.alpha.isApprox(VectorXd::Constant(G, 1.0 / G)));
    CHECK((s.M - brute_force_oracle(I, I)).norm() < 1e-12);
  }
}

TEST_CASE("solution invariants on the random corpus") {
  CounterRng rng(2024, 5);
  for (int i = 0; i < 300; ++i) {
    const int p = 1 + i % 5;
    const int G = 1 + (i / 5) % 6;
    const Instance inst = random_instance(hash_combine(55, static_cast<std::uint64_t>(i)), p, G);
    const MaggingSolution s = maximin_point(inst.B, inst.Sigma);
    const SigmaMetric m(inst.Sigma);

    CHECK(s.alpha.minCoeff() >= 0.0);
    CHECK(std::abs(s.alpha.sum() - 1.0) <= 1e-10);
    CHECK((s.M - inst.B * s.alpha).norm() <= 1e-12 * std::max(1.0, s.M.norm()));
    CHECK((s.M - brute_force_oracle(inst.B, inst.Sigma)).norm() <= 1e-6);
    CHECK(s.kkt_residual <= 1e-8);

    double min_col = 1e300;
    for (int g = 0; g < G; ++g) min_col = std::min(min_col, m.norm(inst.B.col(g)));
    CHECK(m.norm(s.M) <= min_col + 1e-8);

    const double nm = m.norm(s.M);
    for (int g = 0; g < G; ++g) {
      const VectorXd d = inst.B.col(g) - s.M;
      const double ip = m.inner(s.M, d);
      CHECK(ip >= -1e-8 * nm * m.norm(d) - 1e-14);
      if (std::find(s.active.begin(), s.active.end(), g) != s.active.end())
        CHECK(std::abs(ip) <= 1e-8 * std::max(1.0, nm * m.norm(d)));
    }

    for (int k = 0; k < 200; ++k) {
      const VectorXd b = inst.B * random_simplex(rng, G);
      CHECK(s.objective <= b.dot(inst.Sigma * b) + 1e-8);
    }

    const double c = 0.5 + 3.0 * rng.uniform();
    const VectorXd scaled = maximin_point(c * inst.B, inst.Sigma).M;
    CHECK((scaled - c * s.M).norm() <= 1e-8 * std::max(1.0, c * s.M.norm()));
  }
}

TEST_CASE("active set is locally stable on well-separated instances") {
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const auto inst = well_separated_instance(hash_combine(303, static_cast<std::uint64_t>(i)), 2 + i % 4,
                                              2 + (i / 4) % 4);
    if (!inst) continue;
    const MaggingSolution s = maximin_point(inst->B, inst->Sigma);
    CounterRng rng(303, static_cast<std::uint64_t>(i));
    MatrixXd E(inst->B.rows(), inst->B.cols());
    for (Eigen::Index r = 0; r < E.rows(); ++r)
      for (Eigen::Index c = 0; c < E.cols(); ++c) E(r, c) = rng.normal();
    const SigmaMetric m(inst->Sigma);
    double worst = 0.0;
    for (Eigen::Index c = 0; c < E.cols(); ++c) worst = std::max(worst, m.norm(E.col(c)));
    E *= 1e-6 / worst;
    CHECK(maximin_point(inst->B + E, inst->Sigma).active == s.active);
    ++checked;
  }
  CHECK(checked >= 40);
}

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "maximin/asymvar.hpp"
#include "maximin/confidence.hpp"
#include "maximin/corpus.hpp"
#include "maximin/errors.hpp"
#include "maximin/geometry.hpp"
#include "maximin/linmodel.hpp"
#include "maximin/magging.hpp"
#include "maximin/relaxation.hpp"
#include "maximin/rng.hpp"
#include "maximin/simulate.hpp"

using namespace maximin;

namespace {

constexpr std::uint64_t kMasterSeed = 20240611;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

CoverageReport cell(int table, int p, int n, int reps) {
  GridConfig config;
  config.tables = {table};
  config.p_values = {p};
  config.n_values = {n};
  config.replicates = reps;
  config.master_seed = kMasterSeed;
  config.parallelism = workers();
  return run_grid(config).front();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome large_n_coverage() {
  const auto r = cell(1, 3, 2000, 1000);
  return {r.coverage >= 0.92 && r.coverage <= 0.97,
          fmt("coverage %.3f (+/- %.3f), want [0.92, 0.97]", r.coverage, r.binomial_halfwidth)};
}

Outcome small_n_coverage() {
  const auto r = cell(1, 3, 5, 1000);
  return {r.coverage >= 0.64 && r.coverage <= 0.76,
          fmt("coverage %.3f (+/- %.3f), want [0.64, 0.76]; vertex-mode replicates %.0f", r.coverage,
              r.binomial_halfwidth, r.vertex_mode_count)};
}

Outcome mid_grid_trend() {
  std::vector<CoverageReport> rs;
  for (int n : {100, 500, 2000}) rs.push_back(cell(1, 5, n, 500));
  bool monotone = true;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    if (rs[i].coverage + rs[i].binomial_halfwidth < rs[i - 1].coverage) monotone = false;
  }
  const bool last = rs.back().coverage >= 0.92;
  return {monotone && last, fmt("coverage %.3f, %.3f, %.3f at n = 100, 500, 2000", rs[0].coverage,
                                rs[1].coverage, rs[2].coverage)};
}

Outcome identical_groups_conservative() {
  const auto r = cell(3, 5, 500, 500);
  return {r.coverage >= 0.97,
          fmt("coverage %.3f, want >= 0.97; vertex-mode replicates %.0f of %.0f", r.coverage,
              r.vertex_mode_count, r.evaluated)};
}

Outcome ridge_parity() {
  const auto r = cell(4, 5, 2000, 500);
  bool small_fit = true;
  try {
    ScenarioSpec spec = scenario_presets(4, 10, 5);
    spec.seed = kMasterSeed;
    const GroupEstimates est = fit(generate(spec).data, spec.ridge_jitter);
    small_fit = est.Bhat.allFinite();
  } catch (const Error&) {
    small_fit = false;
  }
  return {r.coverage >= 0.91 && r.coverage <= 0.97 && small_fit,
          fmt("coverage %.3f, want [0.91, 0.97]; p=10 n=5 fit ", r.coverage) +
              (small_fit ? "ok" : "failed")};
}

Outcome ridge_eigenvalue() {
  const auto r = cell(5, 3, 2000, 500);
  return {r.mean_max_eigenvalue >= 0.37 && r.mean_max_eigenvalue <= 0.57,
          fmt("mean max eigenvalue %.3f, want [0.37, 0.57]", r.mean_max_eigenvalue)};
}

Outcome covariance_monte_carlo() {
  const int p = 3;
  const int n = 2000;
  const int reps = 2000;
  ScenarioSpec spec = scenario_presets(1, p, n);
  const MatrixXd B0 = true_coefficients(spec);
  const VectorXd M0 = analytic_maximin(1, B0);
  std::vector<VectorXd> draws(reps);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers(); ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < reps; r = next++) {
        ScenarioSpec s = spec;
        s.seed = hash_combine(kMasterSeed, static_cast<std::uint64_t>(r));
        const GroupEstimates est = fit(generate(s).data);
        draws[static_cast<std::size_t>(r)] = std::sqrt(static_cast<double>(n)) *
                                             (maximin_point(est.Bhat, est.Sigma_hat).M - M0);
      }
    });
  }
  for (auto& t : pool) t.join();
  VectorXd mean = VectorXd::Zero(p);
  for (const auto& d : draws) mean += d;
  mean /= reps;
  MatrixXd cov = MatrixXd::Zero(p, p);
  for (const auto& d : draws) cov += (d - mean) * (d - mean).transpose();
  cov /= reps - 1;
  const MatrixXd W = population_covariance_gaussian(B0, MatrixXd::Identity(p, p), 1.0).W;
  const double err = (cov - W).norm() / W.norm();
  return {err <= 0.15, fmt("relative Frobenius error %.4f, want <= 0.15", err)};
}

Outcome derivatives() {
  int tested = 0;
  int passed = 0;
  double worst = 0.0;
  for (int i = 0; tested < 200 && i < 1000; ++i) {
    const int p = 2 + i % 4;
    const int G = 2 + (i / 4) % 4;
    const auto inst = well_separated_instance(hash_combine(kMasterSeed, 7000 + i), p, G);
    if (!inst) continue;
    const MaggingSolution sol = maximin_point(inst->B, inst->Sigma);
    const SigmaMetric metric(inst->Sigma);
    const MaggingDifferential d = differentiate(inst->B, metric, sol);
    CounterRng rng(kMasterSeed, static_cast<std::uint64_t>(i));
    double inst_worst = 0.0;
    for (std::size_t a = 0; a < d.active.size(); ++a) {
      VectorXd e(p);
      for (int k = 0; k < p; ++k) e(k) = rng.normal();
      e.normalize();
      const VectorXd an = d.dB[a] * e;
      const VectorXd fd = magging_fd_column(inst->B, inst->Sigma, d.active[a], e, 1e-6);
      const double scale = std::max(an.norm(), d.dB[a].norm() * e.norm());
      inst_worst = std::max(inst_worst, (fd - an).norm() / scale);
    }
    MatrixXd delta(p, p);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) delta(r, c) = rng.normal();
    delta = (0.5 * (delta + delta.transpose())).eval();
    delta /= delta.norm();
    const VectorXd an = d.dSigma(delta);
    const VectorXd fd = magging_fd_sigma(inst->B, inst->Sigma, delta, 1e-6);
    const double scale = std::max({an.norm(), d.span_operator.norm() * d.M.norm(), 1e-12});
    inst_worst = std::max(inst_worst, (fd - an).norm() / scale);
    ++tested;
    if (inst_worst <= 1e-4) ++passed;
    worst = std::max(worst, inst_worst);
  }
  return {tested == 200 && passed == tested,
          fmt("%.0f of %.0f instances pass, max relative error %.2e", passed, tested, worst)};
}

Outcome magging_optimality() {
  double worst_gap = 0.0;
  double worst_kkt = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int p = 1 + i % 5;
    const int G = 1 + (i / 5) % 6;
    const Instance inst = random_instance(hash_combine(kMasterSeed, 9000 + i), p, G);
    const MaggingSolution sol = maximin_point(inst.B, inst.Sigma);
    const VectorXd oracle = brute_force_oracle(inst.B, inst.Sigma);
    worst_gap = std::max(worst_gap, SigmaMetric(inst.Sigma).norm(sol.M - oracle));
    worst_kkt = std::max(worst_kkt, sol.kkt_residual);
  }
  return {worst_gap <= 1e-6 && worst_kkt <= 1e-8,
          fmt("max Sigma-norm gap %.2e, max KKT residual %.2e", worst_gap, worst_kkt)};
}

Outcome relaxation() {
  int violations = 0;
  CounterRng rng(kMasterSeed, 31);
  for (int i = 0; i < 10000; ++i) {
    const int p = 1 + i % 5;
    const int G = 1 + (i / 5) % 6;
    const Instance inst = random_instance(hash_combine(kMasterSeed, 40000 + i), p, G);
    MatrixXd B2 = inst.B;
    const double scale = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < G; ++c) B2(r, c) += scale * rng.normal();
    const NormGap g = maximin_norm_gap(inst.B, B2, inst.Sigma);
    if (g.gap > g.bound + 1e-12) ++violations;
  }

  const int p = 3;
  const int n = 2000;
  const int reps = 500;
  const double eps = 0.1;
  ScenarioSpec spec = scenario_presets(1, p, n);
  const MatrixXd Sigma0 = population_covariance(spec);
  const VectorXd M0 = analytic_maximin(1, true_coefficients(spec));
  std::vector<char> inside(reps, 0);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers(); ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < reps; r = next++) {
        ScenarioSpec s = spec;
        s.seed = hash_combine(kMasterSeed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(r));
        const GroupEstimates est = fit(generate(s).data);
        const GroupBoxes boxes = group_confidence_boxes(est, 0.05);
        const CoveringRegion region = covering_region(boxes, Sigma0, eps);
        inside[static_cast<std::size_t>(r)] = contains_relaxed(region, M0) ? 1 : 0;
      }
    });
  }
  for (auto& t : pool) t.join();
  const double rate = static_cast<double>(std::count(inside.begin(), inside.end(), 1)) / reps;
  return {violations == 0 && rate >= 0.95,
          fmt("%.0f Lipschitz violations in 10^4 pairs; covering membership %.3f, want >= 0.95",
              violations, rate)};
}

Outcome chi2_round_trip() {
  double worst = 0.0;
  for (int dof = 1; dof <= 50; ++dof) {
    for (double q : {0.5, 0.9, 0.95, 0.99}) {
      worst = std::max(worst, std::abs(chi2_cdf(dof, chi2_quantile(dof, q)) - q));
    }
  }
  return {worst <= 1e-8, fmt("max CDF error %.2e", worst)};
}

Outcome determinism() {
  GridConfig config;
  config.tables = {1, 2};
  config.p_values = {3, 5};
  config.n_values = {20, 200};
  config.replicates = 100;
  config.master_seed = kMasterSeed;
  config.parallelism = 1;
  const std::string a = grid_csv(run_grid(config));
  const std::string b = grid_csv(run_grid(config));
  config.parallelism = 8;
  const std::string c = grid_csv(run_grid(config));
  return {a == b && a == c, std::string("serial runs ") + (a == b ? "match" : "differ") +
                                ", parallelism 1 vs 8 " + (a == c ? "match" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"table-1 coverage, p=3 n=2000", large_n_coverage},
      {"table-1 undercoverage, p=3 n=5", small_n_coverage},
      {"table-1 trend, p=5", mid_grid_trend},
      {"table-3 conservatism, p=5 n=500", identical_groups_conservative},
      {"table-4 ridge parity, p=5 n=2000", ridge_parity},
      {"table-5 eigenvalue, p=3 n=2000", ridge_eigenvalue},
      {"population W vs Monte-Carlo covariance", covariance_monte_carlo},
      {"finite-difference derivatives", derivatives},
      {"magging oracle and KKT", magging_optimality},
      {"relaxation bound and covering", relaxation},
      {"chi-square round trip", chi2_round_trip},
      {"simulation determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", index - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

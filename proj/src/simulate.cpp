#include "maximin/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "maximin/asymvar.hpp"
#include "maximin/confidence.hpp"
#include "maximin/errors.hpp"
#include "maximin/magging.hpp"
#include "maximin/rng.hpp"

namespace maximin {

namespace {

constexpr double kTableJitter = 1e-4;

struct ReplicateOutcome {
  bool evaluated = false;
  bool covered = false;
  bool vertex_mode = false;
  double max_eig = 0.0;
};

VectorXd true_maximin(int table, const ScenarioSpec& spec, const MatrixXd& B0) {
  if (table >= 1 && table <= 5) return analytic_maximin(table, B0);
  return maximin_point(B0, population_covariance(spec)).M;
}

ReplicateOutcome run_replicate(const ScenarioSpec& base, int table, int rep,
                               const SimulationOptions& options) {
  ScenarioSpec spec = base;
  spec.seed = hash_combine(base.seed, static_cast<std::uint64_t>(rep));
  ReplicateOutcome out;
  const GeneratedData gen = generate(spec);
  const VectorXd m0 = true_maximin(table, spec, gen.true_B);
  try {
    const GroupEstimates est = fit(gen.data, spec.ridge_jitter);
    CovarianceOptions cov_opts;
    if (options.known_noise_variance) cov_opts.sigma2 = spec.noise_sd * spec.noise_sd;
    if (options.known_sigma) cov_opts.known_sigma = population_covariance(spec);
    const PluginResult plug = plugin_covariance(est, gen.data.stacked_design(), cov_opts);
    const ConfidenceRegion region = build_region(plug.solution.M, plug.covariance, spec.n, options.alpha);
    out.evaluated = true;
    out.covered = contains(region, m0).inside;
    out.vertex_mode = plug.covariance.vertex_mode;
    out.max_eig = max_eigenvalue(plug.covariance);
  } catch (const Error&) {
    out.evaluated = false;
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

bool cell_supported(int table, int p, int n) {
  if (table < 1 || table > 5 || p < 1 || n < 1) return false;
  if (table <= 3 && p >= n) return false;
  if (table == 3 && (8 * p) / 10 < 1) return false;
  if (table == 2 && p < 2) return false;
  return true;
}

ScenarioSpec scenario_presets(int table, int p, int n) {
  ScenarioSpec spec;
  spec.p = p;
  spec.n = n;
  spec.noise_sd = 1.0;
  spec.design = DesignRule::SharedStandardNormal;
  switch (table) {
    case 1:
      spec.G = p;
      spec.coefficients = CoefficientRule::BasisVectors;
      break;
    case 2:
      spec.G = p;
      spec.coefficients = CoefficientRule::SharedPlusNoise;
      break;
    case 3:
      spec.G = (8 * p) / 10;
      spec.coefficients = CoefficientRule::Identical;
      break;
    case 4:
    case 5:
      spec.G = p;
      spec.coefficients = CoefficientRule::BasisVectors;
      spec.ridge_jitter = kTableJitter;
      break;
    default:
      throw DomainError("unsupported table id " + std::to_string(table));
  }
  spec.validate();
  return spec;
}

VectorXd analytic_maximin(int table, const MatrixXd& B0) {
  const Eigen::Index p = B0.rows();
  const Eigen::Index G = B0.cols();
  VectorXd m = VectorXd::Zero(p);
  switch (table) {
    case 1:
    case 4:
    case 5:
      for (Eigen::Index g = 0; g < G; ++g) m(g) = 1.0 / static_cast<double>(G);
      break;
    case 2: {
      const double lo = B0.row(1).minCoeff();
      const double hi = B0.row(1).maxCoeff();
      m(0) = 1.0;
      m(1) = std::clamp(0.0, lo, hi);
      break;
    }
    case 3:
      m(0) = 1.0;
      break;
    default:
      throw DomainError("unsupported table id " + std::to_string(table));
  }
  return m;
}

CoverageReport run_cell(const ScenarioSpec& spec, int replicates, const SimulationOptions& options,
                        int table) {
  spec.validate();
  if (replicates < 0) throw DomainError("replicates must be nonnegative");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const auto start = std::chrono::steady_clock::now();

  CoverageReport report;
  report.scenario = spec;
  report.table = table;
  report.replicates = replicates;

  if (table >= 1 && table <= 5 && replicates > 0) {
    // The closed-form reference must agree with the exhaustive oracle.
    ScenarioSpec probe = spec;
    probe.seed = hash_combine(spec.seed, 0);
    const MatrixXd b0 = true_coefficients(probe);
    if (b0.cols() <= 15) {
      const VectorXd oracle = brute_force_oracle(b0, population_covariance(probe));
      if ((oracle - analytic_maximin(table, b0)).norm() > 1e-8) {
        throw Error("analytic maximin effect disagrees with the oracle");
      }
    }
  }

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(replicates));
  const int workers = std::max(1, std::min(options.parallelism, std::max(1, replicates)));
  if (workers == 1) {
    for (int r = 0; r < replicates; ++r) outcomes[static_cast<std::size_t>(r)] = run_replicate(spec, table, r, options);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < replicates; r = next++) {
          outcomes[static_cast<std::size_t>(r)] = run_replicate(spec, table, r, options);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  double eig_sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.evaluated) continue;
    ++report.evaluated;
    if (o.covered) ++report.covered;
    if (o.vertex_mode) ++report.vertex_mode_count;
    eig_sum += o.max_eig;
  }
  report.degenerate_count = replicates - report.evaluated;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (report.evaluated > 0) {
    report.coverage = static_cast<double>(report.covered) / report.evaluated;
    report.binomial_halfwidth =
        1.96 * std::sqrt(report.coverage * (1.0 - report.coverage) / report.evaluated);
    report.mean_max_eigenvalue = eig_sum / report.evaluated;
  } else {
    report.coverage = nan;
    report.binomial_halfwidth = nan;
    report.mean_max_eigenvalue = nan;
  }
  report.coverage_all = replicates > 0 ? static_cast<double>(report.covered) / replicates : nan;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::uint64_t cell_seed(std::uint64_t master_seed, int table, int p, int n) {
  std::uint64_t h = hash_combine(master_seed, static_cast<std::uint64_t>(table));
  h = hash_combine(h, static_cast<std::uint64_t>(p));
  return hash_combine(h, static_cast<std::uint64_t>(n));
}

std::vector<CoverageReport> run_grid(const GridConfig& config, const ProgressFn& progress) {
  std::vector<std::tuple<int, int, int>> cells;
  for (int t : config.tables) {
    if (t < 1 || t > 5) throw DomainError("unsupported table id " + std::to_string(t));
    for (int p : config.p_values)
      for (int n : config.n_values)
        if (cell_supported(t, p, n)) cells.emplace_back(t, p, n);
  }
  SimulationOptions opts;
  opts.alpha = config.alpha;
  opts.parallelism = config.parallelism;
  opts.known_noise_variance = config.known_noise_variance;
  opts.known_sigma = config.known_sigma;

  std::vector<CoverageReport> out;
  for (const auto& [t, p, n] : cells) {
    ScenarioSpec spec = scenario_presets(t, p, n);
    spec.seed = cell_seed(config.master_seed, t, p, n);
    out.push_back(run_cell(spec, config.replicates, opts, t));
    if (progress) progress(out.back(), out.size(), cells.size());
  }
  return out;
}

std::string grid_csv(const std::vector<CoverageReport>& reports) {
  std::string s = "table,p,n,replicates,coverage,halfwidth,degenerate_count,mean_max_eig\n";
  for (const auto& r : reports) {
    s += std::to_string(r.table) + "," + std::to_string(r.scenario.p) + "," + std::to_string(r.scenario.n) +
         "," + std::to_string(r.replicates) + "," + format_number(r.coverage) + "," +
         format_number(r.binomial_halfwidth) + "," + std::to_string(r.degenerate_count) + "," +
         format_number(r.mean_max_eigenvalue) + "\n";
  }
  return s;
}

std::string grid_layout(const std::vector<CoverageReport>& reports, int table, bool eigenvalues) {
  std::set<int> ps;
  std::set<int> ns;
  std::map<std::pair<int, int>, double> cell;
  for (const auto& r : reports) {
    if (r.table != table) continue;
    ps.insert(r.scenario.p);
    ns.insert(r.scenario.n);
    cell[{r.scenario.p, r.scenario.n}] = eigenvalues ? r.mean_max_eigenvalue : r.coverage;
  }
  char buf[64];
  std::string s = "p\\n";
  for (int n : ns) {
    std::snprintf(buf, sizeof buf, "%9d", n);
    s += buf;
  }
  s += "\n";
  for (int p : ps) {
    std::snprintf(buf, sizeof buf, "%3d", p);
    s += buf;
    for (int n : ns) {
      auto it = cell.find({p, n});
      if (it == cell.end() || std::isnan(it->second)) {
        s += "         ";
      } else {
        std::snprintf(buf, sizeof buf, "%9.2f", it->second);
        s += buf;
      }
    }
    s += "\n";
  }
  return s;
}

}  // namespace maximin

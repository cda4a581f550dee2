#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maximin/linmodel.hpp"

namespace maximin {

/// Generating rule of a coverage-table preset (tables 1 to 5).
ScenarioSpec scenario_presets(int table, int p, int n);

/// Closed-form maximin effect of a preset for a given B^0:
///   tables 1, 4, 5: (1/G) sum_g e_g
///   table 2: e_1 + clamp(0, min z, max z) e_2
///   table 3: e_1
VectorXd analytic_maximin(int table, const MatrixXd& B0);

/// Whether a (table, p, n) cell is part of the grid: least-squares tables
/// need p < n; table 3 needs floor(0.8 p) >= 1.
bool cell_supported(int table, int p, int n);

struct SimulationOptions {
  double alpha = 0.05;
  int parallelism = 1;
  /// Use noise_sd^2 instead of the residual estimate in W.
  bool known_noise_variance = false;
  /// Use the population covariance in magging and W (term_V = 0).
  bool known_sigma = false;
};

struct CoverageReport {
  ScenarioSpec scenario;
  int table = 0;  // 0 for a custom scenario
  int replicates = 0;
  int covered = 0;
  int evaluated = 0;         // replicates whose region could be built
  int degenerate_count = 0;  // replicates - evaluated
  int vertex_mode_count = 0;
  // covered / evaluated; NaN when nothing was evaluated.
  double coverage = 0.0;
  // covered / replicates, i.e. degenerate replicates counted as misses.
  double coverage_all = 0.0;
  double binomial_halfwidth = 0.0;  // 95% normal approximation
  double mean_max_eigenvalue = 0.0; // over evaluated replicates
  double wall_time_seconds = 0.0;
};

/// Per replicate: generate, fit, magging, W, region, then test whether the
/// true maximin effect is covered. Replicate r uses seed
/// hash(spec.seed, r); results do not depend on `parallelism`.
CoverageReport run_cell(const ScenarioSpec& spec, int replicates,
                        const SimulationOptions& options = {}, int table = 0);

struct GridConfig {
  std::vector<int> tables{1};
  std::vector<int> p_values{3};
  std::vector<int> n_values{100};
  int replicates = 100;
  double alpha = 0.05;
  std::uint64_t master_seed = 1;
  int parallelism = 1;
  bool known_noise_variance = false;
  bool known_sigma = false;
};

std::uint64_t cell_seed(std::uint64_t master_seed, int table, int p, int n);

using ProgressFn = std::function<void(const CoverageReport&, std::size_t done, std::size_t total)>;

/// Runs every supported (table, p, n) cell in order.
std::vector<CoverageReport> run_grid(const GridConfig& config, const ProgressFn& progress = {});

/// One CSV row per cell:
/// table,p,n,replicates,coverage,halfwidth,degenerate_count,mean_max_eig
std::string grid_csv(const std::vector<CoverageReport>& reports);

/// Text matrix shaped like the published tables: rows p, columns n, cells
/// coverage (or mean max eigenvalue when `eigenvalues` is set).
std::string grid_layout(const std::vector<CoverageReport>& reports, int table, bool eigenvalues = false);

}  // namespace maximin

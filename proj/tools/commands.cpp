#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "maximin/asymvar.hpp"
#include "maximin/confidence.hpp"
#include "maximin/corpus.hpp"
#include "maximin/errors.hpp"
#include "maximin/geometry.hpp"
#include "maximin/io.hpp"
#include "maximin/linmodel.hpp"
#include "maximin/magging.hpp"
#include "maximin/rng.hpp"
#include "maximin/simulate.hpp"

namespace maximin::cli {

namespace {

struct Config {
  std::vector<std::string> inputs;
  double alpha = 0.05;
  double jitter = 0.0;
  std::string known_sigma;
  std::string out;
  std::string format;
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool alpha_given = false;
  int jobs = 1;
  // simulate
  std::string grid_path;
  std::vector<int> tables;
  std::vector<int> p_values;
  std::vector<int> n_values;
  int replicates = -1;
  bool known_noise_variance = false;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::uint64_t resolve_seed(const Config& c) {
  if (c.seed_given) return c.seed;
  if (const char* env = std::getenv("MAXIMIN_CI_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
    }
  }
  return c.seed;
}

void emit(const Config& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw DomainError("cannot write " + c.out);
  f << text;
}

CsvDataset load(const Config& c) {
  if (c.inputs.size() == 1) return read_grouped_csv(c.inputs.front());
  return read_group_files(c.inputs);
}

struct Estimate {
  CsvDataset csv;
  GroupEstimates est;
  std::optional<MatrixXd> known_sigma;
  MatrixXd sigma_used;
};

Estimate estimate_from(const Config& c) {
  Estimate e{load(c), {}, std::nullopt, {}};
  try {
    e.est = fit(e.csv.data, c.jitter);
  } catch (const SingularityError& ex) {
    const auto g = static_cast<std::size_t>(ex.group());
    const std::string label = g < e.csv.group_labels.size() ? e.csv.group_labels[g] : std::to_string(g);
    throw SingularityError("X^T X of group '" + label + "' is singular; add --jitter or more rows", ex.group());
  }
  if (!c.known_sigma.empty()) {
    MatrixXd s = read_matrix_csv(c.known_sigma);
    if (s.rows() != e.csv.data.p() || s.cols() != e.csv.data.p()) {
      throw ParseError("known covariance must be " + std::to_string(e.csv.data.p()) + " x " +
                           std::to_string(e.csv.data.p()),
                       0, 0);
    }
    e.known_sigma = s;
  }
  e.sigma_used = e.known_sigma ? *e.known_sigma : e.est.Sigma_hat;
  return e;
}

json estimate_json(const Estimate& e, const MaggingSolution& sol) {
  json b_cols = json::array();
  for (Eigen::Index g = 0; g < e.est.Bhat.cols(); ++g) b_cols.push_back(vector_to_json(e.est.Bhat.col(g)));
  return json{{"schema_version", kSchemaVersion},
              {"n", e.csv.data.n()},
              {"p", e.csv.data.p()},
              {"G", e.csv.data.groups()},
              {"groups", e.csv.group_labels},
              {"predictors", e.csv.predictors},
              {"B_hat", b_cols},
              {"Sigma_hat", matrix_to_json(e.est.Sigma_hat)},
              {"Sigma_used", matrix_to_json(e.sigma_used)},
              {"sigma2_hat", e.est.sigma2_hat},
              {"ridge_jitter", e.est.ridge_jitter_used},
              {"bagging", vector_to_json(bagging(e.est))},
              {"M_hat", vector_to_json(sol.M)},
              {"alpha", vector_to_json(sol.alpha)},
              {"active", sol.active},
              {"diagnostics",
               {{"unique_weights", sol.unique_weights},
                {"vertex_mode", sol.active.size() == 1},
                {"known_sigma", e.known_sigma.has_value()},
                {"sigma2_approximate", e.est.sigma2_approximate},
                {"objective", sol.objective},
                {"kkt_residual", sol.kkt_residual},
                {"iterations", sol.iterations}}}};
}

int cmd_estimate(const Config& c, std::ostream& out, std::ostream&) {
  const Estimate e = estimate_from(c);
  const MaggingSolution sol = maximin_point(e.est.Bhat, e.sigma_used);
  if (c.format == "csv") {
    std::ostringstream s;
    s.precision(17);
    s << "quantity,label,value\n";
    for (Eigen::Index i = 0; i < sol.M.size(); ++i)
      s << "M_hat," << e.csv.predictors[static_cast<std::size_t>(i)] << "," << sol.M(i) << "\n";
    for (Eigen::Index g = 0; g < sol.alpha.size(); ++g)
      s << "alpha," << e.csv.group_labels[static_cast<std::size_t>(g)] << "," << sol.alpha(g) << "\n";
    emit(c, s.str(), out);
  } else {
    emit(c, estimate_json(e, sol).dump(2) + "\n", out);
  }
  return kOk;
}

int cmd_region(const Config& c, std::ostream& out, std::ostream& err) {
  const Estimate e = estimate_from(c);
  CovarianceOptions opts;
  opts.known_sigma = e.known_sigma;
  const PluginResult plug = plugin_covariance(e.est, e.csv.data.stacked_design(), opts);
  const ConfidenceRegion region = build_region(plug.solution.M, plug.covariance, e.csv.data.n(), c.alpha);

  json j = to_json(region);
  j["flags"]["sigma2_approximate"] = e.est.sigma2_approximate;
  j["flags"]["unique_weights"] = plug.solution.unique_weights;
  j["covariance"] = to_json(plug.covariance);
  j["estimate"] = estimate_json(e, plug.solution);
  j["max_eigenvalue"] = max_eigenvalue(plug.covariance);
  emit(c, j.dump(2) + "\n", out);

  err << "confidence region at level " << region.level << " (n = " << region.n_used
      << ", p = " << region.p_used << ")\n";
  err << "  center:";
  for (Eigen::Index i = 0; i < region.center.size(); ++i) err << " " << region.center(i);
  err << "\n  semi-axes:";
  const VectorXd axes = region.semi_axes();
  for (Eigen::Index i = 0; i < axes.size(); ++i) err << " " << axes(i);
  err << "\n  max eigenvalue of W: " << max_eigenvalue(plug.covariance) << "\n";
  if (region.vertex_mode) err << "  note: single active group (vertex mode); coverage is not guaranteed\n";
  if (e.est.sigma2_approximate) err << "  note: p >= n, noise variance estimate is approximate\n";
  return kOk;
}

int cmd_simulate(const Config& c, std::ostream& out, std::ostream& err) {
  GridConfig grid;
  if (!c.grid_path.empty()) {
    std::ifstream f(c.grid_path);
    if (!f) throw ParseError("cannot open " + c.grid_path, 0, 0);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("grid config: ") + e.what(), 0, static_cast<int>(e.byte));
    }
    grid = grid_config_from_json(j);
  }
  if (!c.tables.empty()) grid.tables = c.tables;
  if (!c.p_values.empty()) grid.p_values = c.p_values;
  if (!c.n_values.empty()) grid.n_values = c.n_values;
  if (c.replicates >= 0) grid.replicates = c.replicates;
  if (c.seed_given || std::getenv("MAXIMIN_CI_SEED") || c.grid_path.empty()) grid.master_seed = resolve_seed(c);
  if (c.jobs > 1) grid.parallelism = c.jobs;
  if (c.alpha_given) grid.alpha = c.alpha;
  if (c.known_noise_variance) grid.known_noise_variance = true;

  const auto reports = run_grid(grid, [&](const CoverageReport& r, std::size_t done, std::size_t total) {
    err << "[" << done << "/" << total << "] table " << r.table << " p=" << r.scenario.p
        << " n=" << r.scenario.n << " coverage=" << r.coverage << " (" << r.wall_time_seconds << " s)\n";
  });
  if (c.format == "json") {
    json j{{"schema_version", kSchemaVersion}, {"config", to_json(grid)}, {"cells", json::array()}};
    for (const auto& r : reports) j["cells"].push_back(to_json(r));
    emit(c, j.dump(2) + "\n", out);
  } else if (c.format == "table") {
    std::string s;
    for (int t : grid.tables) {
      s += "table " + std::to_string(t) + " coverage\n" + grid_layout(reports, t);
      if (t >= 4) s += "table " + std::to_string(t) + " mean max eigenvalue\n" + grid_layout(reports, t, true);
    }
    emit(c, s, out);
  } else {
    emit(c, grid_csv(reports), out);
  }
  return kOk;
}

int cmd_check(const Config& c, std::ostream& out, std::ostream&) {
  const std::uint64_t seed = resolve_seed(c);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << " " << detail << "\n";
    if (!ok) ++failures;
  };

  {
    double worst = 0.0;
    double worst_kkt = 0.0;
    for (int i = 0; i < 200; ++i) {
      const int p = 1 + i % 5;
      const int G = 1 + (i / 5) % 6;
      const Instance inst = random_instance(hash_combine(seed, static_cast<std::uint64_t>(i)), p, G);
      const MaggingSolution sol = maximin_point(inst.B, inst.Sigma);
      const VectorXd oracle = brute_force_oracle(inst.B, inst.Sigma);
      const SigmaMetric metric(inst.Sigma);
      worst = std::max(worst, metric.norm(sol.M - oracle));
      worst_kkt = std::max(worst_kkt, sol.kkt_residual);
    }
    report("magging-oracle", worst <= 1e-6, "max Sigma-norm gap " + sci(worst));
    report("magging-kkt", worst_kkt <= 1e-8, "max residual " + sci(worst_kkt));
  }
  {
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
      const auto inst = well_separated_instance(hash_combine(seed, 1000 + static_cast<std::uint64_t>(i)), 3, 3);
      if (!inst) continue;
      const MaggingSolution sol = maximin_point(inst->B, inst->Sigma);
      const SigmaMetric metric(inst->Sigma);
      const MaggingDifferential d = differentiate(inst->B, metric, sol);
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      VectorXd e(3);
      for (int k = 0; k < 3; ++k) e(k) = rng.normal();
      e.normalize();
      const VectorXd an = d.dB[0] * e;
      const VectorXd fd = magging_fd_column(inst->B, inst->Sigma, sol.active[0], e, 1e-6);
      const double scale = std::max(an.norm(), d.dB[0].norm() * e.norm());
      worst = std::max(worst, (fd - an).norm() / scale);
      ++checked;
    }
    report("derivative-fd", checked > 0 && worst <= 1e-4,
           std::to_string(checked) + " instances, max relative error " + sci(worst));
  }
  {
    double worst = 0.0;
    for (int dof = 1; dof <= 10; ++dof)
      for (double q : {0.5, 0.9, 0.95, 0.99}) worst = std::max(worst, std::abs(chi2_cdf(dof, chi2_quantile(dof, q)) - q));
    report("chi2-roundtrip", worst <= 1e-8, "max CDF error " + sci(worst));
  }
  {
    ScenarioSpec spec = scenario_presets(1, 3, 20);
    spec.seed = seed;
    report("generate-determinism", generate(spec).data == generate(spec).data, "");
  }
  return failures == 0 ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximin effects: magging estimates and asymptotic confidence regions"};
  app.require_subcommand(1, 1);
  Config c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("inputs", c.inputs, "CSV file with a group column, or one CSV per group")
        ->required();
    sub->add_option("--jitter", c.jitter, "ridge jitter added to covariance diagonals")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--known-sigma", c.known_sigma, "CSV file holding a known p x p covariance");
    sub->add_option("--out", c.out, "write output to this path instead of stdout");
    sub->add_option("--seed", c.seed, "random seed")->each([&](const std::string&) { c.seed_given = true; });
    sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* estimate = app.add_subcommand("estimate", "per-group fits and the magging estimate");
  add_common(estimate);
  estimate->add_option("--alpha", c.alpha, "significance level");
  estimate->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  CLI::App* region = app.add_subcommand("region", "asymptotic confidence ellipsoid for the maximin effect");
  add_common(region);
  region->add_option("--alpha", c.alpha, "significance level");
  region->add_option("--format", c.format, "json")->check(CLI::IsMember({"json"}));

  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo coverage grid");
  simulate->add_option("--config", c.grid_path, "grid configuration JSON");
  simulate->add_option("--tables", c.tables, "table presets (1-5)")->delimiter(',');
  simulate->add_option("--p", c.p_values, "predictor counts")->delimiter(',');
  simulate->add_option("--n", c.n_values, "samples per group")->delimiter(',');
  simulate->add_option("--replicates", c.replicates, "replicates per cell");
  simulate->add_option("--alpha", c.alpha, "significance level")->each([&](const std::string&) { c.alpha_given = true; });
  simulate->add_option("--seed", c.seed, "master seed")->each([&](const std::string&) { c.seed_given = true; });
  simulate->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--format", c.format, "csv, json or table")->check(CLI::IsMember({"csv", "json", "table"}));
  simulate->add_option("--out", c.out, "write output to this path instead of stdout");
  simulate->add_flag("--known-noise-variance", c.known_noise_variance, "use the true noise variance in W");

  CLI::App* check = app.add_subcommand("check", "run the invariant self-test corpus");
  check->add_option("--seed", c.seed, "corpus seed")->each([&](const std::string&) { c.seed_given = true; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    for (CLI::App* sub : app.get_subcommands()) err << sub->help();
    return kUsage;
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    err << "usage error: --alpha must lie in (0, 1)\n";
    return kUsage;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(c, out, err);
    if (region->parsed()) return cmd_region(c, out, err);
    if (simulate->parsed()) return cmd_simulate(c, out, err);
    if (check->parsed()) return cmd_check(c, out, err);
  } catch (const ParseError& e) {
    err << "parse error";
    if (e.line() > 0) err << " at line " << e.line() << ", column " << e.column();
    err << ": " << e.what() << "\n";
    return kParse;
  } catch (const SingularityError& e) {
    err << "singular fit: " << e.what() << "\n";
    return kSingularFit;
  } catch (const ConditioningError& e) {
    err << "conditioning error: " << e.what() << "\n  eigenvalues of W:";
    for (Eigen::Index i = 0; i < e.eigenvalues().size(); ++i) err << " " << e.eigenvalues()(i);
    err << "\n";
    return kConditioning;
  } catch (const SizeError& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const DimensionError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "degenerate problem: " << e.what() << "\n";
    return kDegenerate;
  } catch (const json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  }
  return kUsage;
}

}  // namespace maximin::cli

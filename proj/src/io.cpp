#include "maximin/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "maximin/errors.hpp"

namespace maximin {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct Header {
  int y = -1;
  int group = -1;
  std::vector<int> predictor_cols;
  std::vector<std::string> predictors;
  std::size_t width = 0;
};

Header parse_header(const std::string& line, bool group_column) {
  Header h;
  const auto fields = split_fields(line);
  h.width = fields.size();
  for (std::size_t c = 0; c < fields.size(); ++c) {
    const std::string name = unquote(fields[c]);
    const int col = static_cast<int>(c);
    if (name.empty()) throw ParseError("empty column name in header", 1, col + 1);
    if (name == "y") {
      if (h.y >= 0) throw ParseError("duplicate response column y", 1, col + 1);
      h.y = col;
    } else if (name == "group") {
      if (!group_column) throw ParseError("unexpected group column", 1, col + 1);
      if (h.group >= 0) throw ParseError("duplicate group column", 1, col + 1);
      h.group = col;
    } else {
      h.predictor_cols.push_back(col);
      h.predictors.push_back(name);
    }
  }
  if (h.y < 0) throw ParseError("header has no response column y", 1, 1);
  if (group_column && h.group < 0) throw ParseError("header has no group column", 1, 1);
  if (h.predictor_cols.empty()) throw ParseError("header has no predictor columns", 1, 1);
  return h;
}

struct RawGroup {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

GroupData to_group(const RawGroup& raw, std::size_t p) {
  GroupData g;
  const auto n = static_cast<Eigen::Index>(raw.y.size());
  g.design.resize(n, static_cast<Eigen::Index>(p));
  g.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.response(i) = raw.y[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < p; ++j) g.design(i, static_cast<Eigen::Index>(j)) = raw.x[static_cast<std::size_t>(i)][j];
  }
  return g;
}

void read_rows(std::istream& in, const Header& h, std::vector<std::string>& labels,
               std::map<std::string, RawGroup>& groups) {
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != h.width) {
      throw ParseError("expected " + std::to_string(h.width) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no, static_cast<int>(std::min(fields.size(), h.width)) + 1);
    }
    std::string label = h.group >= 0 ? unquote(fields[static_cast<std::size_t>(h.group)]) : "";
    if (h.group >= 0 && label.empty()) throw ParseError("empty group label", line_no, h.group + 1);
    auto [it, inserted] = groups.try_emplace(label);
    if (inserted) labels.push_back(label);
    RawGroup& g = it->second;
    const auto y = parse_double(fields[static_cast<std::size_t>(h.y)]);
    if (!y) throw ParseError("response is not a number", line_no, h.y + 1);
    g.y.push_back(*y);
    std::vector<double> row;
    for (int c : h.predictor_cols) {
      const auto v = parse_double(fields[static_cast<std::size_t>(c)]);
      if (!v) throw ParseError("predictor is not a number", line_no, c + 1);
      row.push_back(*v);
    }
    g.x.push_back(std::move(row));
  }
}

CsvDataset assemble(const std::vector<std::string>& labels, const std::map<std::string, RawGroup>& groups,
                    const std::vector<std::string>& predictors) {
  if (labels.empty()) throw ParseError("no data rows", 2, 1);
  std::vector<GroupData> data;
  const std::size_t n = groups.at(labels.front()).y.size();
  for (const auto& label : labels) {
    const RawGroup& raw = groups.at(label);
    if (raw.y.size() != n) {
      throw ParseError("group '" + label + "' has " + std::to_string(raw.y.size()) +
                           " rows; every group needs " + std::to_string(n),
                       0, 0);
    }
    data.push_back(to_group(raw, predictors.size()));
  }
  return {GroupedDataset(std::move(data)), labels, predictors};
}

json flags_json(bool vertex, bool known) {
  return json{{"vertex_mode", vertex}, {"known_sigma", known}};
}

}  // namespace

CsvDataset parse_grouped_csv(std::istream& in, bool group_column) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw ParseError("missing header row", 1, 1);
  const Header h = parse_header(line, group_column);
  std::vector<std::string> labels;
  std::map<std::string, RawGroup> groups;
  read_rows(in, h, labels, groups);
  return assemble(labels, groups, h.predictors);
}

CsvDataset read_grouped_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0, 0);
  return parse_grouped_csv(in, true);
}

CsvDataset read_group_files(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ParseError("no input files", 0, 0);
  std::vector<std::string> labels;
  std::map<std::string, RawGroup> groups;
  std::vector<std::string> predictors;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0, 0);
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw ParseError(path + ": missing header row", 1, 1);
    const Header h = parse_header(line, false);
    if (predictors.empty()) {
      predictors = h.predictors;
    } else if (predictors != h.predictors) {
      throw ParseError(path + ": predictor columns differ from the first file", 1, 1);
    }
    std::vector<std::string> one;
    std::map<std::string, RawGroup> tmp;
    try {
      read_rows(in, h, one, tmp);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), e.line(), e.column());
    }
    if (one.empty()) throw ParseError(path + ": no data rows", 2, 1);
    labels.push_back(path);
    groups[path] = std::move(tmp.begin()->second);
  }
  return assemble(labels, groups, predictors);
}

MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0, 0);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    bool numeric = true;
    int bad_col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_double(fields[c]);
      if (!v) {
        numeric = false;
        bad_col = static_cast<int>(c) + 1;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw ParseError("matrix entry is not a number", line_no, bad_col);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged matrix row", line_no, 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix file", line_no, 1);
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("matrix must be a nonempty array of rows");
  const std::size_t cols = j.front().size();
  MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw DomainError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
  }
  return m;
}

namespace {

const char* rule_name(CoefficientRule r) {
  switch (r) {
    case CoefficientRule::BasisVectors: return "basis-vectors";
    case CoefficientRule::SharedPlusNoise: return "shared-plus-noise";
    case CoefficientRule::Identical: return "identical";
    case CoefficientRule::Custom: return "custom";
  }
  return "";
}

CoefficientRule rule_from(const std::string& s) {
  if (s == "basis-vectors") return CoefficientRule::BasisVectors;
  if (s == "shared-plus-noise") return CoefficientRule::SharedPlusNoise;
  if (s == "identical") return CoefficientRule::Identical;
  if (s == "custom") return CoefficientRule::Custom;
  throw DomainError("unknown coefficient_rule '" + s + "'");
}

}  // namespace

json to_json(const ScenarioSpec& spec) {
  json j{{"schema_version", kSchemaVersion},
         {"p", spec.p},
         {"G", spec.G},
         {"n", spec.n},
         {"coefficient_rule", rule_name(spec.coefficients)},
         {"design_rule", spec.design == DesignRule::SharedStandardNormal ? "shared-standard-normal"
                                                                         : "per-group-scale"},
         {"noise_sd", spec.noise_sd},
         {"seed", spec.seed},
         {"ridge_jitter", spec.ridge_jitter}};
  if (spec.coefficients == CoefficientRule::Custom) j["custom_coefficients"] = matrix_to_json(spec.custom_coefficients);
  if (spec.design == DesignRule::PerGroupScale) j["group_scales"] = spec.group_scales;
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec spec;
  spec.p = j.at("p").get<int>();
  spec.G = j.at("G").get<int>();
  spec.n = j.at("n").get<int>();
  spec.coefficients = rule_from(j.value("coefficient_rule", std::string("basis-vectors")));
  if (spec.coefficients == CoefficientRule::Custom) spec.custom_coefficients = matrix_from_json(j.at("custom_coefficients"));
  const std::string design = j.value("design_rule", std::string("shared-standard-normal"));
  if (design == "shared-standard-normal") {
    spec.design = DesignRule::SharedStandardNormal;
  } else if (design == "per-group-scale") {
    spec.design = DesignRule::PerGroupScale;
    spec.group_scales = j.at("group_scales").get<std::vector<double>>();
  } else {
    throw DomainError("unknown design_rule '" + design + "'");
  }
  spec.noise_sd = j.value("noise_sd", 1.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.ridge_jitter = j.value("ridge_jitter", 0.0);
  spec.validate();
  return spec;
}

json to_json(const MaggingSolution& sol) {
  return json{{"M", vector_to_json(sol.M)},
              {"alpha", vector_to_json(sol.alpha)},
              {"active", sol.active},
              {"objective", sol.objective},
              {"kkt_residual", sol.kkt_residual},
              {"unique_weights", sol.unique_weights},
              {"iterations", sol.iterations}};
}

json to_json(const AsymptoticCovariance& cov) {
  return json{{"W", matrix_to_json(cov.W)},
              {"term_B", matrix_to_json(cov.term_B)},
              {"term_V", matrix_to_json(cov.term_V)},
              {"C_hat", matrix_to_json(cov.C_hat)},
              {"sigma2_used", cov.sigma2_used},
              {"active_used", cov.active_used},
              {"flags", flags_json(cov.vertex_mode, cov.known_sigma)}};
}

json to_json(const ConfidenceRegion& region) {
  std::vector<double> precision;
  for (Eigen::Index i = 0; i < region.precision.rows(); ++i)
    for (Eigen::Index j = 0; j < region.precision.cols(); ++j) precision.push_back(region.precision(i, j));
  return json{{"schema_version", kSchemaVersion},
              {"center", vector_to_json(region.center)},
              {"precision", precision},
              {"dimension", region.p_used},
              {"radius2", region.radius2},
              {"level", region.level},
              {"n", region.n_used},
              {"eigen", {{"values", vector_to_json(region.eigenvalues)},
                         {"axes", matrix_to_json(region.axes.transpose())},
                         {"semi_axes", vector_to_json(region.semi_axes())}}},
              {"flags", flags_json(region.vertex_mode, region.known_sigma)}};
}

json to_json(const CoveringRegion& region) {
  constexpr std::size_t kMaxListedCenters = 4096;
  json j{{"schema_version", kSchemaVersion},
         {"p", region.p},
         {"G", region.G},
         {"level", region.level},
         {"Sigma0", matrix_to_json(region.Sigma0)},
         {"lattice", region.nodes},
         {"piece_count", region.piece_count()},
         {"radii", region.radii},
         {"shell_radii", region.shell_radii},
         {"shell_bounds", {region.shell_lower(), region.shell_upper()}}};
  if (region.piece_count() <= kMaxListedCenters) {
    json centers = json::array();
    for (std::size_t k = 0; k < region.piece_count(); ++k) centers.push_back(matrix_to_json(region.center(k)));
    j["centers"] = std::move(centers);
  }
  return j;
}

json to_json(const CoverageReport& r) {
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  return json{{"table", r.table},
              {"scenario", to_json(r.scenario)},
              {"replicates", r.replicates},
              {"covered", r.covered},
              {"evaluated", r.evaluated},
              {"degenerate_count", r.degenerate_count},
              {"vertex_mode_count", r.vertex_mode_count},
              {"coverage", num(r.coverage)},
              {"coverage_all", num(r.coverage_all)},
              {"binomial_halfwidth", num(r.binomial_halfwidth)},
              {"mean_max_eigenvalue", num(r.mean_max_eigenvalue)},
              {"exclusion_policy", "degenerate replicates excluded from coverage; counted as misses in coverage_all"}};
}

GridConfig grid_config_from_json(const json& j) {
  GridConfig c;
  c.tables = j.value("tables", c.tables);
  c.p_values = j.value("p", j.value("p_values", c.p_values));
  c.n_values = j.value("n", j.value("n_values", c.n_values));
  c.replicates = j.value("replicates", c.replicates);
  c.alpha = j.value("alpha", c.alpha);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.known_noise_variance = j.value("known_noise_variance", false);
  c.known_sigma = j.value("known_sigma", false);
  if (c.replicates < 0) throw DomainError("replicates must be nonnegative");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (c.parallelism < 1) throw DomainError("parallelism must be >= 1");
  return c;
}

json to_json(const GridConfig& c) {
  return json{{"schema_version", kSchemaVersion},
              {"tables", c.tables},
              {"p", c.p_values},
              {"n", c.n_values},
              {"replicates", c.replicates},
              {"alpha", c.alpha},
              {"master_seed", c.master_seed},
              {"parallelism", c.parallelism},
              {"known_noise_variance", c.known_noise_variance},
              {"known_sigma", c.known_sigma}};
}

}  // namespace maximin

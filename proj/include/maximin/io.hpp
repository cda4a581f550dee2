#pragma once

#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maximin/confidence.hpp"
#include "maximin/linmodel.hpp"
#include "maximin/magging.hpp"
#include "maximin/relaxation.hpp"
#include "maximin/simulate.hpp"

namespace maximin {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Data read from CSV. Groups appear in order of first occurrence.
struct CsvDataset {
  GroupedDataset data;
  std::vector<std::string> group_labels;
  std::vector<std::string> predictors;
};

/// Comma-separated, header row required. Response column `y`; group column
/// `group` (required when `group_column` is true); every other column is a
/// predictor, in header order. Throws ParseError with 1-based line/column.
CsvDataset parse_grouped_csv(std::istream& in, bool group_column = true);
CsvDataset read_grouped_csv(const std::string& path);
/// One file per group, each with the same header and no `group` column.
CsvDataset read_group_files(const std::vector<std::string>& paths);

/// Plain numeric matrix, one row per line. A non-numeric first line is taken
/// as a header and skipped.
MatrixXd read_matrix_csv(const std::string& path);

json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const json& j);

json to_json(const MaggingSolution& sol);
json to_json(const AsymptoticCovariance& cov);
json to_json(const ConfidenceRegion& region);
json to_json(const CoveringRegion& region);
json to_json(const CoverageReport& report);

GridConfig grid_config_from_json(const json& j);
json to_json(const GridConfig& config);

json matrix_to_json(const MatrixXd& m);  // array of rows
json vector_to_json(const VectorXd& v);
MatrixXd matrix_from_json(const json& j);

}  // namespace maximin

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "extremile/model.hpp"
#include "extremile/simulation.hpp"

namespace extremile {

/// Header plus raw cells of a comma-separated file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a header row and data rows. Throws DataError on a missing file or a
/// row with the wrong number of fields.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

struct LoadedData {
  /// Labeled rows (response present).
  std::optional<LabeledDataset> labeled;
  /// Rows whose response cell is blank.
  UnlabeledDataset unlabeled;
  /// Design column names, "(intercept)" first when prepended.
  std::vector<std::string> design_columns;
  /// 1-based data row numbers of the labeled and unlabeled rows.
  std::vector<std::size_t> labeled_rows;
  std::vector<std::size_t> unlabeled_rows;
};

/// Splits a table into labeled and unlabeled samples. With no response every row
/// is unlabeled. Empty `covariates` selects every column except the response.
/// Throws DataError naming row and column for non-numeric cells, and for a
/// missing column or an empty labeled set when a response is given.
LoadedData load_csv(const CsvTable& table, const std::optional<std::string>& response,
                    const std::vector<std::string>& covariates, bool add_intercept = true);
LoadedData load_csv(const std::string& path, const std::optional<std::string>& response,
                    const std::vector<std::string>& covariates, bool add_intercept = true);

/// Covariate matrix for prediction: columns in `design_columns` order, with the
/// intercept filled when it is the first name.
Eigen::MatrixXd design_from_table(const CsvTable& table,
                                  const std::vector<std::string>& design_columns);

// Fit artifacts.

struct FitArtifact {
  std::string estimator = "SL";
  std::string basis = "legendre3";
  std::vector<std::string> design_columns;
  /// Empty for the kernel baseline, which has no coefficient process.
  Eigen::MatrixXd alpha;
  std::vector<ExtremileCoef> coefficients;
  nlohmann::json diagnostics = nlohmann::json::object();
};

nlohmann::json to_json(const FitArtifact& a);
/// Throws ConfigError when required keys are missing or malformed.
FitArtifact fit_artifact_from_json(const nlohmann::json& j);
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// Scenarios and reports.

nlohmann::json to_json(const ScenarioConfig& c);
/// Unknown keys and out-of-range values raise ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
/// A file may hold a single scenario object or an array of them.
std::vector<ScenarioConfig> scenarios_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReplicationReport& r);
ReplicationReport report_from_json(const nlohmann::json& j);

}  // namespace extremile

#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "gcmt/estimate.hpp"
#include "gcmt/model.hpp"

namespace gcmt {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column bindings: regressor "const" means a constant 1; for a nominal
/// outcome, regressor R binds to column "R_k" for alternative k when that
/// column exists, otherwise to the shared column "R".
struct ContinuousBinding {
  std::string column;
  std::vector<std::string> regressors;
};

struct NominalBinding {
  std::string name;
  int alternatives = 0;
  std::string chosen_column;
  std::vector<std::string> regressors;
};

struct RunConfig {
  std::uint64_t seed = 0;
  ModelSpec spec;
  std::vector<ContinuousBinding> continuous;
  std::vector<NominalBinding> nominal;
  std::vector<std::string> dof_columns;  // linked mode
  EstimateOptions options;
  std::string input_path;
  std::string output_dir = ".";
  std::string config_hash;
  nlohmann::json raw;  // subcommand-specific blocks
};

RunConfig load_config(const std::string& path);

struct ColumnSummary {
  std::string name;
  double mean = 0.0, min = 0.0, max = 0.0;
  int missing = 0;
};

struct IngestReport {
  int total_rows = 0;
  int kept = 0;
  int dropped = 0;
  std::vector<std::string> drop_reasons;  // one entry per dropped row
  std::vector<ColumnSummary> columns;
};

/// Wide-format CSV (one row per decision unit) to Dataset. Rows with
/// missing bound fields are dropped and logged; unknown bound columns and
/// out-of-range chosen indices are fatal.
std::pair<Dataset, IngestReport> ingest(const std::string& csv_path,
                                        const RunConfig& config);

/// Inverse of ingest for generated data: per-alternative regressors get
/// "_k" suffixed columns so the file round-trips through ingest.
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const RunConfig& config, const std::string& meta_line);

/// FNV-1a over the file bytes, hex string.
std::string hash_file(const std::string& path);

std::string version_string();

/// "key=value key=value" line embedded in every output artifact.
std::string meta_line(const RunConfig& config);
nlohmann::json meta_json(const RunConfig& config);

void write_text(const std::string& path, const std::string& content);

}  // namespace gcmt

#include "gcmt/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gcmt/simulate.hpp"

namespace gcmt {

using nlohmann::json;

std::string version_string() { return "0.1.0"; }

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << content;
}

namespace {

BoolMatrix parse_mask(const json& j, int rows, int cols,
                      const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw config_error(what + ": expected " + std::to_string(rows) + " rows");
  BoolMatrix mask(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw config_error(what + ": row " + std::to_string(r + 1) +
                         " needs " + std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) mask(r, c) = j[r][c].get<int>() != 0;
  }
  return mask;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  RunConfig config;
  config.config_hash = hash_file(path);
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse failure: ") + e.what());
  }
  config.raw = j;
  try {
    if (!j.contains("seed")) throw config_error("config requires a seed");
    config.seed = j.at("seed").get<std::uint64_t>();

    const json& model = j.at("model");
    int s = 0, g = 0;
    OutcomeLayout layout;
    for (const auto& cj : model.value("continuous", json::array())) {
      ContinuousBinding binding;
      binding.column = cj.at("column").get<std::string>();
      for (const auto& r : cj.at("regressors"))
        binding.regressors.push_back(r.get<std::string>());
      if (s == 0) s = static_cast<int>(binding.regressors.size());
      if (static_cast<int>(binding.regressors.size()) != s)
        throw config_error("continuous outcomes must share a regressor count");
      config.continuous.push_back(std::move(binding));
    }
    layout.H = static_cast<int>(config.continuous.size());
    for (const auto& nj : model.at("nominal")) {
      NominalBinding binding;
      binding.name = nj.at("name").get<std::string>();
      binding.alternatives = nj.at("alternatives").get<int>();
      binding.chosen_column = nj.at("chosen_column").get<std::string>();
      for (const auto& r : nj.at("regressors"))
        binding.regressors.push_back(r.get<std::string>());
      if (g == 0) g = static_cast<int>(binding.regressors.size());
      if (static_cast<int>(binding.regressors.size()) != g)
        throw config_error("nominal outcomes must share a regressor count");
      layout.alt_counts.push_back(binding.alternatives);
      config.nominal.push_back(std::move(binding));
    }
    config.spec = ModelSpec::dense(layout, s, g);

    if (model.contains("gamma_mask"))
      config.spec.gamma_mask = parse_mask(model["gamma_mask"], layout.H, s, "gamma_mask");
    if (model.contains("beta_mask"))
      config.spec.beta_mask = parse_mask(model["beta_mask"],
                                         layout.total_alternatives(), g, "beta_mask");
    if (model.contains("sigma_pattern"))
      config.spec.sigma_pattern = parse_mask(model["sigma_pattern"],
                                             layout.diff_dim(), layout.diff_dim(),
                                             "sigma_pattern");

    const json& dof = model.value("dof", json{{"mode", "fixed"}, {"value", 300.0}});
    const std::string mode = dof.value("mode", "fixed");
    if (mode == "fixed") {
      config.spec.dof_mode = DofMode::fixed;
      config.spec.fixed_dof = dof.value("value", 300.0);
    } else if (mode == "linked") {
      config.spec.dof_mode = DofMode::linked;
      for (const auto& c : dof.at("covariates"))
        config.dof_columns.push_back(c.get<std::string>());
      config.spec.dof_covariates = static_cast<int>(config.dof_columns.size());
    } else {
      throw config_error("dof mode must be fixed or linked");
    }
    config.spec.validate();

    const json est = j.value("estimation", json::object());
    config.options.qmc.n_draws = est.value("draws", 200);
    config.options.qmc.skip = est.value("skip", 100);
    config.options.qmc.replicates = est.value("replicates", 10);
    const std::string rand = est.value("randomization", "none");
    if (rand == "none")
      config.options.qmc.randomization = QmcRandomization::none;
    else if (rand == "random_shift")
      config.options.qmc.randomization = QmcRandomization::random_shift;
    else
      throw config_error("randomization must be none or random_shift");
    config.options.qmc.seed = derive_seed(config.seed, 4, 0);
    config.options.optim.max_iter = est.value("max_iter", 300);
    config.options.optim.grad_tol = est.value("grad_tol", 1e-4);
    config.options.optim.step_tol = est.value("step_tol", 1e-10);
    config.options.optim.grad_step = est.value("grad_step", 1e-5);
    config.options.optim.verbose = est.value("verbose", false);
    config.options.hess_step = est.value("hess_step", 1e-4);

    const json io = j.value("io", json::object());
    config.input_path = io.value("input", "");
    config.output_dir = io.value("output_dir", ".");
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(std::string("invalid config: ") + e.what());
  }
  return config;
}

std::string meta_line(const RunConfig& config) {
  std::ostringstream out;
  out << "config_hash=" << config.config_hash << " seed=" << config.seed
      << " draws=" << config.options.qmc.n_draws
      << " skip=" << config.options.qmc.skip << " randomization="
      << (config.options.qmc.randomization == QmcRandomization::none
              ? "none"
              : "random_shift")
      << " replicates=" << config.options.qmc.replicates
      << " version=" << version_string();
  return out.str();
}

json meta_json(const RunConfig& config) {
  json meta;
  meta["config_hash"] = config.config_hash;
  meta["seed"] = config.seed;
  meta["qmc"] = {{"draws", config.options.qmc.n_draws},
                 {"skip", config.options.qmc.skip},
                 {"randomization",
                  config.options.qmc.randomization == QmcRandomization::none
                      ? "none"
                      : "random_shift"},
                 {"replicates", config.options.qmc.replicates}};
  meta["version"] = version_string();
  return meta;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    size_t start = cell.find_first_not_of(' ');
    cells.push_back(start == std::string::npos ? "" : cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, int> index;

  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open CSV: " + path);
  CsvTable table;
  std::string line;
  do {
    if (!std::getline(in, line)) throw data_error("empty CSV: " + path);
  } while (line.empty() || line[0] == '#');
  table.header = split_csv_line(line);
  for (size_t c = 0; c < table.header.size(); ++c)
    table.index[table.header[c]] = static_cast<int>(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.header.size())
      throw data_error("malformed CSV row " +
                       std::to_string(table.rows.size() + 2) + " in " + path);
    table.rows.push_back(std::move(cells));
  }
  return table;
}

// -2: constant 1; otherwise a column index
int resolve_column(const CsvTable& table, const std::string& name) {
  if (name == "const") return -2;
  const int c = table.find(name);
  if (c < 0) throw data_error("unknown column: " + name);
  return c;
}

int resolve_alt_column(const CsvTable& table, const std::string& name, int alt) {
  if (name == "const") return -2;
  const int suffixed = table.find(name + "_" + std::to_string(alt));
  if (suffixed >= 0) return suffixed;
  const int shared = table.find(name);
  if (shared < 0)
    throw data_error("unknown column: " + name + " (or " + name + "_" +
                     std::to_string(alt) + ")");
  return shared;
}

bool parse_cell(const std::vector<std::string>& row, int col, double& value) {
  if (col == -2) {
    value = 1.0;
    return true;
  }
  const std::string& cell = row[col];
  if (cell.empty()) return false;
  size_t used = 0;
  value = std::stod(cell, &used);
  if (used != cell.size()) throw data_error("non-numeric cell: " + cell);
  return true;
}

}  // namespace

std::pair<Dataset, IngestReport> ingest(const std::string& csv_path,
                                        const RunConfig& config) {
  const CsvTable table = read_csv(csv_path);
  const ModelSpec& spec = config.spec;

  std::vector<std::vector<int>> x_cols(config.continuous.size());
  std::vector<int> y_cols;
  for (size_t h = 0; h < config.continuous.size(); ++h) {
    y_cols.push_back(resolve_column(table, config.continuous[h].column));
    for (const auto& r : config.continuous[h].regressors)
      x_cols[h].push_back(resolve_column(table, r));
  }
  std::vector<int> chosen_cols;
  std::vector<std::vector<std::vector<int>>> z_cols(config.nominal.size());
  for (size_t m = 0; m < config.nominal.size(); ++m) {
    chosen_cols.push_back(resolve_column(table, config.nominal[m].chosen_column));
    z_cols[m].resize(config.nominal[m].alternatives);
    for (int alt = 1; alt <= config.nominal[m].alternatives; ++alt)
      for (const auto& r : config.nominal[m].regressors)
        z_cols[m][alt - 1].push_back(resolve_alt_column(table, r, alt));
  }
  std::vector<int> dof_cols;
  for (const auto& name : config.dof_columns)
    dof_cols.push_back(resolve_column(table, name));

  Dataset data;
  IngestReport report;
  report.total_rows = static_cast<int>(table.rows.size());
  const int h_count = spec.layout.H;
  const int ik = spec.layout.total_alternatives();

  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int file_row = static_cast<int>(r) + 2;  // header is row 1
    Observation obs;
    obs.y.resize(h_count);
    obs.x.resize(h_count, spec.s);
    obs.z.resize(ik, spec.g);
    obs.dof_x.resize(spec.dof_covariates);
    bool missing = false;
    std::string reason;

    try {
      for (int h = 0; h < h_count && !missing; ++h) {
        if (!parse_cell(row, y_cols[h], obs.y[h])) {
          missing = true;
          reason = "row " + std::to_string(file_row) + ": missing " +
                   config.continuous[h].column;
          break;
        }
        for (int c = 0; c < spec.s; ++c) {
          if (!parse_cell(row, x_cols[h][c], obs.x(h, c))) {
            missing = true;
            reason = "row " + std::to_string(file_row) + ": missing " +
                     config.continuous[h].regressors[c];
            break;
          }
        }
      }
      int base = 0;
      for (size_t m = 0; m < config.nominal.size() && !missing; ++m) {
        double chosen_val = 0.0;
        if (!parse_cell(row, chosen_cols[m], chosen_val)) {
          missing = true;
          reason = "row " + std::to_string(file_row) + ": missing " +
                   config.nominal[m].chosen_column;
          break;
        }
        const int chosen = static_cast<int>(std::lround(chosen_val));
        if (chosen < 1 || chosen > config.nominal[m].alternatives)
          throw data_error("row " + std::to_string(file_row) +
                           ": chosen index " + std::to_string(chosen) +
                           " out of range for " + config.nominal[m].name);
        obs.chosen.push_back(chosen);
        for (int alt = 0; alt < config.nominal[m].alternatives && !missing;
             ++alt) {
          for (int c = 0; c < spec.g; ++c) {
            if (!parse_cell(row, z_cols[m][alt][c], obs.z(base + alt, c))) {
              missing = true;
              reason = "row " + std::to_string(file_row) + ": missing " +
                       config.nominal[m].regressors[c];
              break;
            }
          }
        }
        base += config.nominal[m].alternatives;
      }
      for (size_t c = 0; c < dof_cols.size() && !missing; ++c) {
        if (!parse_cell(row, dof_cols[c], obs.dof_x[c])) {
          missing = true;
          reason = "row " + std::to_string(file_row) + ": missing " +
                   config.dof_columns[c];
        }
      }
    } catch (const data_error&) {
      throw;
    } catch (const std::exception& e) {
      throw data_error("row " + std::to_string(file_row) + ": " + e.what());
    }

    if (missing) {
      ++report.dropped;
      report.drop_reasons.push_back(reason);
      continue;
    }
    data.push_back(std::move(obs));
    ++report.kept;
  }

  for (size_t c = 0; c < table.header.size(); ++c) {
    ColumnSummary summary;
    summary.name = table.header[c];
    double sum = 0.0;
    int n = 0;
    summary.min = kInf;
    summary.max = -kInf;
    for (const auto& row : table.rows) {
      if (row[c].empty()) {
        ++summary.missing;
        continue;
      }
      try {
        const double v = std::stod(row[c]);
        sum += v;
        summary.min = std::min(summary.min, v);
        summary.max = std::max(summary.max, v);
        ++n;
      } catch (const std::exception&) {
        ++summary.missing;
      }
    }
    summary.mean = n > 0 ? sum / n : std::nan("");
    if (n == 0) summary.min = summary.max = std::nan("");
    report.columns.push_back(std::move(summary));
  }
  return {std::move(data), std::move(report)};
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const RunConfig& config, const std::string& meta) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "# " << meta << "\n";

  std::vector<std::string> header;
  auto add_unique = [&](const std::string& name) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      header.push_back(name);
  };
  for (const auto& binding : config.continuous) {
    add_unique(binding.column);
    for (const auto& r : binding.regressors)
      if (r != "const") add_unique(r);
  }
  for (const auto& binding : config.nominal) {
    add_unique(binding.chosen_column);
    for (const auto& r : binding.regressors) {
      if (r == "const") continue;
      for (int alt = 1; alt <= binding.alternatives; ++alt)
        add_unique(r + "_" + std::to_string(alt));
    }
  }
  for (const auto& c : config.dof_columns)
    if (c != "const") add_unique(c);

  for (size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 < header.size() ? "," : "\n");

  for (const auto& obs : data) {
    std::map<std::string, double> cells;
    for (size_t h = 0; h < config.continuous.size(); ++h) {
      cells[config.continuous[h].column] = obs.y[h];
      for (size_t c = 0; c < config.continuous[h].regressors.size(); ++c) {
        const std::string& r = config.continuous[h].regressors[c];
        if (r != "const") cells[r] = obs.x(h, c);
      }
    }
    int base = 0;
    for (size_t m = 0; m < config.nominal.size(); ++m) {
      cells[config.nominal[m].chosen_column] = obs.chosen[m];
      for (int alt = 1; alt <= config.nominal[m].alternatives; ++alt)
        for (size_t c = 0; c < config.nominal[m].regressors.size(); ++c) {
          const std::string& r = config.nominal[m].regressors[c];
          if (r != "const")
            cells[r + "_" + std::to_string(alt)] = obs.z(base + alt - 1, c);
        }
      base += config.nominal[m].alternatives;
    }
    for (size_t c = 0; c < config.dof_columns.size(); ++c)
      if (config.dof_columns[c] != "const")
        cells[config.dof_columns[c]] = obs.dof_x[c];

    for (size_t c = 0; c < header.size(); ++c) {
      std::ostringstream cell;
      cell.precision(12);
      cell << cells[header[c]];
      out << cell.str() << (c + 1 < header.size() ? "," : "\n");
    }
  }
}

}  // namespace gcmt

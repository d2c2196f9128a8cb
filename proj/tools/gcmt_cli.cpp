#include <cmath>
#include <filesystem>
#include <random>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "gcmt/io.hpp"
#include "gcmt/postprocess.hpp"
#include "gcmt/simulate.hpp"

namespace {

using gcmt::RunConfig;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConverge = 4;
constexpr int kExitNumerical = 5;

std::string out_path(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.output_dir);
  return (std::filesystem::path(config.output_dir) / name).string();
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

// canonical column bindings for the built-in synthetic recipe, so generated
// files can be re-ingested with a matching model block
void apply_dgp_bindings(RunConfig& config, const gcmt::DgpSpec& dgp) {
  config.spec = dgp.spec;
  config.continuous = {{"commute", {"const", "hi", "children", "bachelor"}}};
  config.nominal = {{"density", 5, "density_choice",
                     {"const", "hi", "children", "bachelor", "commute"}}};
  config.dof_columns = {"const"};
}

gcmt::DgpSpec dgp_from_config(const RunConfig& config) {
  const json block = config.raw.value("dgp", json::object());
  const std::string builtin = block.value("builtin", "commute_density");
  if (builtin != "commute_density")
    throw gcmt::config_error("unknown dgp builtin: " + builtin);
  return gcmt::commute_density_dgp(block.value("dof", 12.0));
}

void write_json(const std::string& path, json j, const RunConfig& config) {
  j["meta"] = gcmt::meta_json(config);
  gcmt::write_text(path, j.dump(2) + "\n");
}

int cmd_estimate(const RunConfig& config) {
  if (config.input_path.empty())
    throw gcmt::config_error("estimate requires io.input");
  auto [data, ingest_report] = gcmt::ingest(config.input_path, config);
  if (data.empty()) throw gcmt::data_error("no usable rows in input");

  const gcmt::ParameterVector start =
      gcmt::starting_values(config.spec, data);
  const gcmt::EstimateResult res =
      gcmt::estimate(config.spec, data, start, config.options);

  json j;
  j["converged"] = res.converged;
  j["message"] = res.message;
  j["loglik"] = res.loglik;
  j["n_obs"] = res.n_obs;
  j["n_iter"] = res.n_iter;
  j["packed"] = std::vector<double>(res.packed.data(),
                                    res.packed.data() + res.packed.size());
  j["parameter_names"] = config.spec.parameter_names();
  j["ingest"] = {{"total_rows", ingest_report.total_rows},
                 {"kept", ingest_report.kept},
                 {"dropped", ingest_report.dropped},
                 {"drop_reasons", ingest_report.drop_reasons}};
  json params = json::array();
  for (size_t i = 0; i < res.report.size(); ++i) {
    const double se = res.report_se[i];
    params.push_back({{"name", res.report[i]},
                      {"estimate", res.report_est[i]},
                      {"ase", se},
                      {"tstat", se > 0 ? res.report_est[i] / se : 0.0}});
  }
  j["parameters"] = params;
  write_json(out_path(config, "estimate.json"), j, config);

  std::ostringstream csv;
  csv << "# " << gcmt::meta_line(config) << "\n";
  csv << "name,estimate,ase,tstat\n";
  for (size_t i = 0; i < res.report.size(); ++i) {
    const double se = res.report_se[i];
    csv << res.report[i] << "," << fmt(res.report_est[i]) << "," << fmt(se)
        << "," << fmt(se > 0 ? res.report_est[i] / se : 0.0) << "\n";
  }
  gcmt::write_text(out_path(config, "estimate_params.csv"), csv.str());

  if (!res.converged) {
    std::cerr << "estimation did not converge: " << res.message << "\n";
    return kExitNoConverge;
  }
  return 0;
}

int cmd_simulate(RunConfig config) {
  const gcmt::DgpSpec dgp = dgp_from_config(config);
  apply_dgp_bindings(config, dgp);
  const int n = config.raw.value("dgp", json::object()).value("n", 1000);
  const gcmt::Dataset data =
      gcmt::generate_dataset(dgp, n, gcmt::derive_seed(config.seed, 1, 0));
  gcmt::write_dataset_csv(out_path(config, "dataset.csv"), data, config,
                          gcmt::meta_line(config));
  return 0;
}

int cmd_montecarlo(RunConfig config) {
  const gcmt::DgpSpec dgp = dgp_from_config(config);
  apply_dgp_bindings(config, dgp);
  const json block = config.raw.value("dgp", json::object());
  const int resamples = block.value("resamples", 10);
  const int n = block.value("n", 1000);
  gcmt::McReport report;
  if (block.value("estimator", "cml") == "truth_stub") {
    // smoke-test mode: skips estimation, reports truth plus deterministic
    // jitter so the full report pipeline can be exercised cheaply
    const gcmt::Vector truth =
        gcmt::report_values(dgp.spec, dgp.theta_true);
    gcmt::EstimatorFn stub =
        [&](const gcmt::Dataset&, std::uint64_t seed)
        -> std::optional<std::pair<gcmt::Vector, gcmt::Vector>> {
      std::mt19937_64 eng(seed);
      std::normal_distribution<double> noise(0.0, 0.01);
      gcmt::Vector est = truth;
      for (int i = 0; i < est.size(); ++i) est[i] += noise(eng);
      return std::make_pair(est, gcmt::Vector::Constant(truth.size(), 0.1));
    };
    report = gcmt::run_monte_carlo(dgp, resamples, n, config.seed, stub);
  } else {
    report = gcmt::run_monte_carlo(dgp, resamples, n, config.seed,
                                   config.options);
  }

  std::ostringstream csv;
  csv << "# " << gcmt::meta_line(config) << "\n";
  csv << "name,true_value,mev,mab,apb,fsse,ase,ase_fsse_ratio,cp,power\n";
  json rows = json::array();
  for (const auto& row : report.rows) {
    csv << row.name << "," << fmt(row.true_value) << "," << fmt(row.mev) << ","
        << fmt(row.mab) << "," << fmt(row.apb) << "," << fmt(row.fsse) << ","
        << fmt(row.ase) << "," << fmt(row.ase_fsse_ratio) << "," << fmt(row.cp)
        << "," << fmt(row.power) << "\n";
    rows.push_back({{"name", row.name},
                    {"true_value", row.true_value},
                    {"mev", row.mev},
                    {"mab", row.mab},
                    {"apb", row.apb},
                    {"fsse", row.fsse},
                    {"ase", row.ase},
                    {"ase_fsse_ratio", row.ase_fsse_ratio},
                    {"cp", row.cp},
                    {"power", row.power}});
  }
  gcmt::write_text(out_path(config, "montecarlo.csv"), csv.str());
  json j;
  j["rows"] = rows;
  j["resamples"] = report.resamples;
  j["failures"] = report.failures;
  write_json(out_path(config, "montecarlo.json"), j, config);
  return 0;
}

gcmt::ParameterVector theta_for_predict(const RunConfig& config,
                                        const gcmt::Dataset& data) {
  const json block = config.raw.value("predict", json::object());
  gcmt::ParameterVector baseline =
      gcmt::starting_values(config.spec, data);
  std::vector<double> packed;
  if (block.contains("packed")) {
    packed = block["packed"].get<std::vector<double>>();
  } else if (block.contains("estimate_json")) {
    std::ifstream in(block["estimate_json"].get<std::string>());
    if (!in) throw gcmt::data_error("cannot open estimate_json");
    json fit;
    in >> fit;
    packed = fit.at("packed").get<std::vector<double>>();
  } else {
    throw gcmt::config_error("predict needs packed or estimate_json");
  }
  if (static_cast<int>(packed.size()) != config.spec.n_free())
    throw gcmt::config_error("packed parameter length mismatch");
  const gcmt::Vector v =
      Eigen::Map<const gcmt::Vector>(packed.data(), packed.size());
  return gcmt::unpack(config.spec, v, baseline);
}

int cmd_predict(const RunConfig& config) {
  if (config.input_path.empty())
    throw gcmt::config_error("predict requires io.input");
  auto [data, ingest_report] = gcmt::ingest(config.input_path, config);
  (void)ingest_report;
  if (data.empty()) throw gcmt::data_error("no usable rows in input");
  const gcmt::ParameterVector theta = theta_for_predict(config, data);
  gcmt::LoglikEvaluator eval(config.spec, theta, config.options.qmc);

  std::ostringstream csv;
  csv << "# " << gcmt::meta_line(config) << "\n";
  csv << "obs,outcome,alternative,prob,raw_sum\n";
  for (size_t i = 0; i < data.size(); ++i) {
    const gcmt::PredictResult pred = gcmt::predict_probs(eval, data[i]);
    for (size_t m = 0; m < pred.probs.size(); ++m)
      for (int a = 0; a < pred.probs[m].size(); ++a)
        csv << i + 1 << "," << config.nominal[m].name << "," << a + 1 << ","
            << fmt(pred.probs[m][a]) << "," << fmt(pred.raw_sums[m]) << "\n";
  }
  gcmt::write_text(out_path(config, "predict.csv"), csv.str());
  return 0;
}

int cmd_wtp(const RunConfig& config) {
  const json block = config.raw.value("wtp", json::object());
  if (!block.contains("queries"))
    throw gcmt::config_error("wtp needs a queries list");
  std::ostringstream csv;
  csv << "# " << gcmt::meta_line(config) << "\n";
  csv << "name,type,wtp\n";
  json rows = json::array();
  for (const auto& q : block["queries"]) {
    const std::string type = q.at("type").get<std::string>();
    const std::string name = q.at("name").get<std::string>();
    double value = 0.0;
    if (type == "log") {
      value = gcmt::wtp_log_attribute(
          q.at("beta_attr").get<double>(), q.at("beta_price").get<double>(),
          q.at("attr_value").get<double>(), q.value("attr_unit_scale", 1.0),
          q.value("price_unit_scale", 1.0));
    } else if (type == "linear") {
      value = gcmt::wtp_linear_attribute(q.at("beta_attr").get<double>(),
                                         q.at("beta_cost").get<double>(),
                                         q.value("unit_scale", 1.0));
    } else {
      throw gcmt::config_error("wtp query type must be log or linear");
    }
    csv << name << "," << type << "," << fmt(value) << "\n";
    rows.push_back({{"name", name}, {"type", type}, {"wtp", value}});
  }
  gcmt::write_text(out_path(config, "wtp.csv"), csv.str());
  json j;
  j["rows"] = rows;
  write_json(out_path(config, "wtp.json"), j, config);
  return 0;
}

int cmd_crossval(const RunConfig& config) {
  if (config.input_path.empty())
    throw gcmt::config_error("crossval requires io.input");
  auto [data, ingest_report] = gcmt::ingest(config.input_path, config);
  (void)ingest_report;
  if (data.empty()) throw gcmt::data_error("no usable rows in input");
  const json block = config.raw.value("crossval", json::object());
  const int folds = block.value("folds", 5);
  const double train_frac = block.value("train_frac", 0.7);
  const int outcome = block.value("outcome", 0);
  const gcmt::CvReport report =
      gcmt::cross_validate(data, folds, config.spec, config.options,
                           gcmt::derive_seed(config.seed, 3, 0), outcome,
                           train_frac);

  std::ostringstream csv;
  csv << "# " << gcmt::meta_line(config) << "\n";
  csv << "fold,partition,alternative,root_score,classical_score\n";
  for (size_t f = 0; f < report.folds.size(); ++f) {
    const gcmt::CvFold& fold = report.folds[f];
    if (!fold.ok) continue;
    for (int a = 0; a < fold.in_root.size(); ++a) {
      csv << f + 1 << ",in," << a + 1 << "," << fmt(fold.in_root[a]) << ","
          << fmt(fold.in_classical[a]) << "\n";
      csv << f + 1 << ",out," << a + 1 << "," << fmt(fold.out_root[a]) << ","
          << fmt(fold.out_classical[a]) << "\n";
    }
  }
  gcmt::write_text(out_path(config, "crossval.csv"), csv.str());

  json j;
  j["failures"] = report.failures;
  auto vec = [](const gcmt::Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  if (report.in_root_mean.size() > 0) {
    j["in_root_mean"] = vec(report.in_root_mean);
    j["in_root_std"] = vec(report.in_root_std);
    j["out_root_mean"] = vec(report.out_root_mean);
    j["out_root_std"] = vec(report.out_root_std);
  }
  json fold_notes = json::array();
  for (const auto& fold : report.folds)
    if (!fold.ok) fold_notes.push_back(fold.note);
  j["failed_folds"] = fold_notes;
  write_json(out_path(config, "crossval.json"), j, config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GCM-t estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::int64_t seed_override = -1;
  int draws_override = 0;

  app.add_option("--config", config_path, "config file (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--threads", threads, "worker threads (0 = default)");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--draws", draws_override, "QMC draw count override");

  auto* sub_estimate = app.add_subcommand(
      "estimate", "fit the model to a dataset (fixed DOF 300 gives the "
                  "normal-kernel special case)");
  auto* sub_simulate =
      app.add_subcommand("simulate", "generate a synthetic dataset");
  auto* sub_mc = app.add_subcommand("montecarlo", "repeated-resample study");
  auto* sub_predict =
      app.add_subcommand("predict", "per-observation choice probabilities");
  auto* sub_wtp = app.add_subcommand("wtp", "willingness-to-pay tables");
  auto* sub_cv =
      app.add_subcommand("crossval", "repeated-split predictive validation");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = gcmt::load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed_override >= 0) {
      config.seed = static_cast<std::uint64_t>(seed_override);
      config.options.qmc.seed = gcmt::derive_seed(config.seed, 4, 0);
    }
    if (draws_override > 0) config.options.qmc.n_draws = draws_override;
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif

    if (*sub_estimate) return cmd_estimate(config);
    if (*sub_simulate) return cmd_simulate(config);
    if (*sub_mc) return cmd_montecarlo(config);
    if (*sub_predict) return cmd_predict(config);
    if (*sub_wtp) return cmd_wtp(config);
    if (*sub_cv) return cmd_crossval(config);
    return kExitConfig;
  } catch (const gcmt::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gcmt::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

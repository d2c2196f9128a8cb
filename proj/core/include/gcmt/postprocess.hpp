#pragma once

#include "gcmt/estimate.hpp"
#include "gcmt/model.hpp"

namespace gcmt {

/// Per-nominal-outcome alternative probabilities for one observation,
/// conditional on the continuous outcomes. `probs[m]` is renormalized to
/// sum to 1; `raw_sums[m]` is the pre-normalization total (close to 1 when
/// the simulator is accurate).
struct PredictResult {
  std::vector<Vector> probs;
  std::vector<double> raw_sums;
};

PredictResult predict_probs(const LoglikEvaluator& eval, const Observation& obs);
PredictResult predict_probs(const ParameterVector& theta, const Observation& obs,
                            const ModelSpec& spec, const QmcConfig& qmc);

/// Mean change in alternative probabilities after scaling one choice
/// regressor column, by group. Base and perturbed probabilities share the
/// same QMC point set, so a zero perturbation gives exactly zero change.
struct ElasticityReport {
  std::vector<std::string> group_labels;
  std::vector<int> group_sizes;
  Matrix mean_change;  // group x alternative (one nominal outcome)
  std::vector<std::string> notes;
};

ElasticityReport elasticity(const ParameterVector& theta, const Dataset& data,
                            const ModelSpec& spec, int z_col, double pct_change,
                            const QmcConfig& qmc,
                            const std::vector<int>& group_ids = {},
                            const std::vector<std::string>& group_labels = {},
                            int outcome = 0);

/// WTP for an attribute entering the utility in logs, evaluated at
/// `attr_value * attr_unit_scale` natural units. `price_unit_scale` converts
/// the price coefficient's units into currency (e.g. 1000 when the price
/// coefficient is per $1000).
double wtp_log_attribute(double beta_attr, double beta_price, double attr_value,
                         double attr_unit_scale, double price_unit_scale);

/// WTP for a linear attribute: |beta_attr / beta_cost| * unit_scale.
double wtp_linear_attribute(double beta_attr, double beta_cost,
                            double unit_scale);

/// Per-alternative predictive scores. `root_variant` is sum_i sqrt(|r - p|);
/// `classical_mean_sq` is the mean squared error, kept alongside for
/// external comparability.
struct BrierScores {
  Vector root_variant;
  Vector classical_mean_sq;
};

BrierScores brier_score(const Matrix& probs, const std::vector<int>& chosen);

struct CvFold {
  bool ok = false;
  std::string note;
  // per-observation averages of the root-variant score, so the 70% and 30%
  // partitions are on a common scale
  Vector in_root, out_root;
  Vector in_classical, out_classical;
};

struct CvReport {
  std::vector<CvFold> folds;
  int failures = 0;
  Vector in_root_mean, in_root_std;
  Vector out_root_mean, out_root_std;
};

/// Repeated random-split validation: `folds` independent train/test splits
/// (fraction `train_frac` for estimation), scored on both partitions.
CvReport cross_validate(const Dataset& data, int folds, const ModelSpec& spec,
                        const EstimateOptions& options, std::uint64_t seed,
                        int outcome = 0, double train_frac = 0.7);

}  // namespace gcmt

#pragma once

#include <functional>
#include <optional>

#include "gcmt/estimate.hpp"
#include "gcmt/model.hpp"

namespace gcmt {

/// Deterministic sub-stream derivation: one base seed fans out into named
/// streams (dataset r, shift r, split r, ...) without overlap in practice.
std::uint64_t derive_seed(std::uint64_t base, std::uint32_t stream,
                          std::uint64_t index);

/// Synthetic-data recipe. Covariate columns are either constant 1,
/// Bernoulli(0.5) indicators, or (in the choice block) a copy of a generated
/// continuous outcome, so the continuous and choice parts can be
/// structurally linked.
struct DgpSpec {
  ModelSpec spec;
  ParameterVector theta_true;
  std::vector<int> indicator_cols;  // shared columns in x and z
  int structural_outcome = 0;       // continuous outcome fed into z
  int structural_z_col = -1;        // -1 disables the structural link

  void validate() const;
};

/// Joint commute-distance and residential-density example at the given
/// error-kernel DOF: one continuous outcome, one nominal outcome with five
/// density-band alternatives, household indicators, and the commute distance
/// entering the choice utilities structurally.
DgpSpec commute_density_dgp(double dof);

Dataset generate_dataset(const DgpSpec& dgp, int n, std::uint64_t seed);

struct McRow {
  std::string name;
  double true_value = 0.0;
  double mev = 0.0;
  double mab = 0.0;
  double apb = 0.0;  // NaN when the true value is 0
  double fsse = 0.0;
  double ase = 0.0;
  double ase_fsse_ratio = 0.0;
  double cp = 0.0;
  double power = 0.0;
};

struct McReport {
  std::vector<McRow> rows;
  int resamples = 0;
  int failures = 0;
};

McReport compute_metrics(const Matrix& estimates, const Matrix& ases,
                         const Vector& truth,
                         const std::vector<std::string>& names);

/// Per-resample estimator: gets the dataset and a resample-specific seed,
/// returns reporting-scale estimates and standard errors, or nothing on
/// failure. Lets tests substitute a stub for the real estimator.
using EstimatorFn = std::function<std::optional<std::pair<Vector, Vector>>(
    const Dataset&, std::uint64_t)>;

McReport run_monte_carlo(const DgpSpec& dgp, int resamples, int n,
                         std::uint64_t seed, const EstimatorFn& estimator);

/// Convenience wrapper running the composite-likelihood estimator on each
/// resample with data-driven starting values.
McReport run_monte_carlo(const DgpSpec& dgp, int resamples, int n,
                         std::uint64_t seed,
                         const EstimateOptions& options = {});

}  // namespace gcmt

#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "gcmt/tdist.hpp"
#include "gcmt/transforms.hpp"

namespace gcmt {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class DofMode { fixed, linked };

/// Declarative model description: outcome layout, regressor counts,
/// which coefficients and covariance entries are free, and how the
/// degrees of freedom are specified.
struct ModelSpec {
  OutcomeLayout layout;
  int s = 0;  // continuous regressors per outcome
  int g = 0;  // choice regressors per alternative

  DofMode dof_mode = DofMode::fixed;
  double fixed_dof = 300.0;
  int dof_covariates = 0;  // length of the DOF-link index, linked mode

  // Free-coefficient masks; entries outside the mask stay at the values
  // carried by the baseline ParameterVector (typically zero).
  BoolMatrix gamma_mask;  // H x s
  BoolMatrix beta_mask;   // I_K x g
  // Lower-triangular mask over Sigmabar marking estimated entries.
  // Diagonals at normalized positions are always treated as fixed-to-1.
  BoolMatrix sigma_pattern;  // diff_dim x diff_dim

  void validate() const;
  /// All-free masks sized to the layout (normalized diagonals excluded).
  static ModelSpec dense(OutcomeLayout layout, int s, int g);

  int n_free() const;
  std::vector<std::string> parameter_names() const;
};

/// Structured parameters. `l_raw` is the raw (pre-normalization) lower
/// Cholesky factor of Sigmabar; fixed entries keep whatever value the
/// baseline carries.
struct ParameterVector {
  Matrix gamma;    // H x s
  Matrix beta;     // I_K x g
  Matrix l_raw;    // diff_dim x diff_dim lower triangular
  Vector dof_coef; // dof_covariates entries (linked mode), else empty

  static ParameterVector zero(const ModelSpec& spec);
};

Vector pack(const ModelSpec& spec, const ParameterVector& theta);
/// Inverse of pack; fixed positions come from `baseline`.
ParameterVector unpack(const ModelSpec& spec, const Vector& packed,
                       const ParameterVector& baseline);

struct Observation {
  Vector y;                 // H
  Matrix x;                 // H x s
  Matrix z;                 // I_K x g
  std::vector<int> chosen;  // 1-based, per nominal outcome
  Vector dof_x;             // DOF-link covariates (may be empty)
};

using Dataset = std::vector<Observation>;

struct ConditionalChoice {
  Vector b_arrow;
  Matrix sigma_arrow;
  double dof_arrow = 0.0;
  double alpha = 0.0;
};

/// delta = max(floor, exp(coef . x)); fixed mode ignores the covariates.
double dof_link(const ModelSpec& spec, const Vector& dof_coef,
                const Vector& dof_x);

/// Normalized Sigmabar implied by the raw Cholesky factor.
Matrix sigma_bar(const ModelSpec& spec, const ParameterVector& theta);

struct JointDist {
  Vector b;
  Matrix sigma;
  double dof;
};

JointDist assemble_joint(const ParameterVector& theta, const Observation& obs,
                         const ModelSpec& spec);

struct DifferencedDist {
  Vector b_tilde;
  Matrix sigma_tilde;
};

DifferencedDist difference(const Vector& b, const Matrix& sigma,
                           const Observation& obs, const OutcomeLayout& layout);

ConditionalChoice conditional_choice(const Vector& b_tilde,
                                     const Matrix& sigma_tilde,
                                     const Vector& y, double dof, int h);

ProbEstimate choice_prob(const ConditionalChoice& cond, const QmcConfig& qmc);

/// Likelihood engine bound to one parameter vector. Precomputes the
/// covariance algebra shared by every observation with the same chosen
/// tuple; only the SOV pass and the mean work remain per observation.
class LoglikEvaluator {
 public:
  LoglikEvaluator(const ModelSpec& spec, const ParameterVector& theta,
                  const QmcConfig& qmc);

  double obs_loglik(const Observation& obs) const;
  /// Probability (conditional on y) of the observation's chosen tuple,
  /// using the same pair decomposition as the likelihood path.
  double obs_choice_prob(const Observation& obs) const;
  int n_pairs() const { return static_cast<int>(pair_rows_.size()); }

  /// Builds the per-tuple covariance algebra for every chosen tuple in the
  /// dataset up front, so later evaluation is read-only on the cache.
  void warm_cache(const Dataset& data) const;

  const Matrix& sigma_bar_matrix() const { return sigma_bar_; }
  const OutcomeLayout& layout() const { return spec_.layout; }

 private:
  struct TupleCache {
    std::vector<int> chosen;
    Matrix m;
    Matrix sigma_tilde;
    Eigen::LLT<Matrix> sig_y_llt;
    double logdet_sig_y = 0.0;
    // per pair: rows into the Ubar block, conditional Schur Cholesky,
    // and the regression operator cross^T Sigma_y^{-1}
    std::vector<Matrix> schur_chol;
    std::vector<Matrix> regress;
  };

  const TupleCache& tuple_cache(const std::vector<int>& chosen) const;
  double pair_logprob(const TupleCache& tc, int pair, const Vector& b_tilde,
                      double alpha, double dof) const;

  ModelSpec spec_;
  ParameterVector theta_;
  QmcConfig qmc_;
  Matrix sigma_bar_;
  Matrix sigma_;  // D_m Sigmabar D_m^T
  Matrix dm_;
  std::vector<std::vector<int>> pair_rows_;  // Ubar row sets per CML pair
  mutable std::deque<TupleCache> tuples_;
  std::vector<Matrix> points_;  // Halton points per SOV dimension
};

double obs_loglik(const ParameterVector& theta, const Observation& obs,
                  const ModelSpec& spec, const QmcConfig& qmc);

struct SampleLoglik {
  double total;
  Vector per_obs;
};

/// Sum of per-observation contributions. The reduction sorts contributions
/// before summing so the total is independent of dataset ordering.
SampleLoglik sample_loglik(const ParameterVector& theta, const Dataset& data,
                           const ModelSpec& spec, const QmcConfig& qmc);

/// Reporting-scale view of the parameters: free coefficients as-is,
/// covariance entries on the Sigmabar scale, and delta itself when the
/// DOF link is an intercept-only index. Used for result tables and
/// Monte Carlo metrics.
std::vector<std::string> report_names(const ModelSpec& spec);
Vector report_values(const ModelSpec& spec, const ParameterVector& theta);

}  // namespace gcmt

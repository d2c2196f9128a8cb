#pragma once

#include <functional>
#include <string>

#include "gcmt/model.hpp"

namespace gcmt {

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;

/// Central-difference gradient with per-coordinate step
/// h_i = step * max(1, |x_i|).
Vector numeric_gradient(const ScalarFn& f, const Vector& x, double step);

/// Central-difference Hessian (symmetric, built from gradient differences).
Matrix numeric_hessian(const ScalarFn& f, const Vector& x, double step);

/// Jacobian of a vector-valued map, central differences.
Matrix numeric_jacobian(const VectorFn& f, const Vector& x, double step);

struct OptimOptions {
  int max_iter = 300;
  double grad_tol = 1e-4;     // max-norm of the gradient
  double step_tol = 1e-10;    // parameter movement
  double grad_step = 1e-5;
  bool verbose = false;
};

struct OptimResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int n_iter = 0;
  int n_eval = 0;
  bool converged = false;
  std::string message;
};

/// BFGS ascent with backtracking line search. `f` may return -inf for
/// infeasible points; the line search shrinks until the step is feasible.
OptimResult maximize(const ScalarFn& f, const Vector& x0,
                     const OptimOptions& options = {});

struct EstimateOptions {
  OptimOptions optim;
  double hess_step = 1e-4;
  QmcConfig qmc;
};

struct EstimateResult {
  Vector packed;              // free parameters at the optimum
  ParameterVector theta;
  double loglik = 0.0;
  Matrix cov_packed;          // sandwich covariance of the free parameters
  Vector packed_se;
  std::vector<std::string> report;  // reporting-scale labels
  Vector report_est;
  Vector report_se;           // delta-method standard errors
  int n_obs = 0;
  int n_iter = 0;
  bool converged = false;
  std::string message;
};

/// Data-driven starting values: continuous coefficients by least squares,
/// choice coefficients zero, identity covariance factor, and log(5) for an
/// intercept-only DOF link.
ParameterVector starting_values(const ModelSpec& spec, const Dataset& data);

/// Composite-likelihood estimation with sandwich standard errors. The QMC
/// point set is held fixed across evaluations (common random numbers) so the
/// simulated objective is smooth in the parameters.
EstimateResult estimate(const ModelSpec& spec, const Dataset& data,
                        const ParameterVector& start,
                        const EstimateOptions& options = {});

}  // namespace gcmt

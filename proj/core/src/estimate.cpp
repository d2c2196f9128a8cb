#include "gcmt/estimate.hpp"

#include <cmath>
#include <cstdio>

namespace gcmt {

namespace {

double coord_step(double x, double step) {
  return step * std::max(1.0, std::abs(x));
}

}  // namespace

Vector numeric_gradient(const ScalarFn& f, const Vector& x, double step) {
  const int n = static_cast<int>(x.size());
  Vector g(n);
  Vector xp = x;
  for (int i = 0; i < n; ++i) {
    const double h = coord_step(x[i], step);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix numeric_hessian(const ScalarFn& f, const Vector& x, double step) {
  const int n = static_cast<int>(x.size());
  Matrix hess(n, n);
  Vector xp = x;
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    const double hi = coord_step(x[i], step);
    xp[i] = x[i] + hi;
    const double fp = f(xp);
    xp[i] = x[i] - hi;
    const double fm = f(xp);
    xp[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
  }
  for (int i = 0; i < n; ++i) {
    const double hi = coord_step(x[i], step);
    for (int j = 0; j < i; ++j) {
      const double hj = coord_step(x[j], step);
      xp[i] = x[i] + hi; xp[j] = x[j] + hj;
      const double fpp = f(xp);
      xp[j] = x[j] - hj;
      const double fpm = f(xp);
      xp[i] = x[i] - hi; xp[j] = x[j] + hj;
      const double fmp = f(xp);
      xp[j] = x[j] - hj;
      const double fmm = f(xp);
      xp[i] = x[i]; xp[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return hess;
}

Matrix numeric_jacobian(const VectorFn& f, const Vector& x, double step) {
  const int n = static_cast<int>(x.size());
  Vector xp = x;
  Matrix jac;
  for (int i = 0; i < n; ++i) {
    const double h = coord_step(x[i], step);
    xp[i] = x[i] + h;
    const Vector fp = f(xp);
    xp[i] = x[i] - h;
    const Vector fm = f(xp);
    xp[i] = x[i];
    if (jac.size() == 0) jac.resize(fp.size(), n);
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

OptimResult maximize(const ScalarFn& f, const Vector& x0,
                     const OptimOptions& options) {
  const int n = static_cast<int>(x0.size());
  OptimResult res;
  res.x = x0;
  res.value = f(x0);
  res.n_eval = 1;
  if (!std::isfinite(res.value)) {
    res.message = "objective not finite at the starting point";
    return res;
  }

  auto grad = [&](const Vector& x) {
    res.n_eval += 2 * n;
    return numeric_gradient(f, x, options.grad_step);
  };

  Vector g = grad(res.x);
  Matrix hinv = Matrix::Identity(n, n);
  const double c1 = 1e-4;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    res.n_iter = iter + 1;
    if (g.cwiseAbs().maxCoeff() < options.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }

    Vector d = hinv * g;
    double slope = g.dot(d);
    if (!(slope > 0.0) || !d.allFinite()) {
      hinv.setIdentity();
      d = g;
      slope = g.squaredNorm();
    }

    double t = 1.0;
    double f_new = -kInf;
    Vector x_new;
    bool accepted = false;
    while (t > 1e-14) {
      x_new = res.x + t * d;
      f_new = f(x_new);
      ++res.n_eval;
      if (std::isfinite(f_new) && f_new >= res.value + c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.message = "line search failed";
      break;
    }

    const Vector s = x_new - res.x;
    const Vector g_new = grad(x_new);
    // BFGS inverse update in minimization convention on -f
    const Vector y = g - g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(n, n);
      hinv = (eye - rho * s * y.transpose()) * hinv *
                 (eye - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }

    if (options.verbose) {
      std::fprintf(stderr, "iter %3d  f = %.8f  |g| = %.3e  step = %.2e\n",
                   res.n_iter, f_new, g_new.cwiseAbs().maxCoeff(), t);
    }

    const bool small_step = s.cwiseAbs().maxCoeff() < options.step_tol;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    if (small_step) {
      res.converged = true;
      res.message = "step tolerance reached";
      break;
    }
  }
  res.gradient = g;
  if (res.message.empty()) res.message = "iteration limit reached";
  return res;
}

ParameterVector starting_values(const ModelSpec& spec, const Dataset& data) {
  ParameterVector theta = ParameterVector::zero(spec);
  const int h = spec.layout.H;
  const int n = static_cast<int>(data.size());
  for (int i = 0; i < h; ++i) {
    Matrix xmat(n, spec.s);
    Vector yvec(n);
    for (int r = 0; r < n; ++r) {
      xmat.row(r) = data[r].x.row(i);
      yvec[r] = data[r].y[i];
    }
    const Vector coef =
        xmat.colPivHouseholderQr().solve(yvec);
    for (int j = 0; j < spec.s; ++j)
      if (spec.gamma_mask(i, j)) theta.gamma(i, j) = coef[j];
  }
  if (spec.dof_mode == DofMode::linked && spec.dof_covariates > 0)
    theta.dof_coef[0] = std::log(5.0);
  return theta;
}

EstimateResult estimate(const ModelSpec& spec, const Dataset& data,
                        const ParameterVector& start,
                        const EstimateOptions& options) {
  spec.validate();
  if (data.empty()) throw parameter_error("estimate: empty dataset");

  const ParameterVector baseline = start;
  auto objective = [&](const Vector& packed) -> double {
    try {
      const ParameterVector theta = unpack(spec, packed, baseline);
      return sample_loglik(theta, data, spec, options.qmc).total;
    } catch (const parameter_error&) {
      return -kInf;
    }
  };

  const Vector x0 = pack(spec, start);
  const OptimResult opt = maximize(objective, x0, options.optim);

  EstimateResult res;
  res.packed = opt.x;
  res.theta = unpack(spec, opt.x, baseline);
  res.loglik = opt.value;
  res.n_obs = static_cast<int>(data.size());
  res.n_iter = opt.n_iter;
  res.converged = opt.converged;
  res.message = opt.message;

  const int n = static_cast<int>(opt.x.size());
  const Matrix hess = numeric_hessian(objective, opt.x, options.hess_step);

  // score matrix: per-observation central differences, one evaluator per
  // perturbed parameter value so the covariance algebra is shared
  Matrix scores(res.n_obs, n);
  {
    Vector xp = opt.x;
    for (int j = 0; j < n; ++j) {
      const double h = coord_step(opt.x[j], options.optim.grad_step);
      xp[j] = opt.x[j] + h;
      const Vector per_p =
          sample_loglik(unpack(spec, xp, baseline), data, spec, options.qmc)
              .per_obs;
      xp[j] = opt.x[j] - h;
      const Vector per_m =
          sample_loglik(unpack(spec, xp, baseline), data, spec, options.qmc)
              .per_obs;
      xp[j] = opt.x[j];
      scores.col(j) = (per_p - per_m) / (2.0 * h);
    }
  }
  const Matrix j_mat = scores.transpose() * scores;

  const Eigen::FullPivLU<Matrix> lu(hess);
  if (lu.isInvertible()) {
    const Matrix hinv = lu.inverse();
    res.cov_packed = hinv * j_mat * hinv;
  } else {
    res.cov_packed = Matrix::Constant(n, n, std::nan(""));
  }
  res.packed_se = res.cov_packed.diagonal().cwiseMax(0.0).cwiseSqrt();

  res.report = report_names(spec);
  res.report_est = report_values(spec, res.theta);
  auto report_fn = [&](const Vector& packed) {
    return report_values(spec, unpack(spec, packed, baseline));
  };
  const Matrix jac = numeric_jacobian(report_fn, opt.x, options.optim.grad_step);
  const Matrix report_cov = jac * res.cov_packed * jac.transpose();
  res.report_se = report_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return res;
}

}  // namespace gcmt

#include "gcmt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gcmt {

namespace {

double log_kappa(double dof, int p) {
  return std::lgamma(0.5 * (dof + p)) - std::lgamma(0.5 * dof) -
         0.5 * p * std::log(M_PI * dof);
}

}  // namespace

void ModelSpec::validate() const {
  layout.validate();
  const int h = layout.H;
  const int ik = layout.total_alternatives();
  const int d = layout.diff_dim();
  if (gamma_mask.rows() != h || gamma_mask.cols() != s)
    throw parameter_error("gamma_mask shape mismatch");
  if (beta_mask.rows() != ik || beta_mask.cols() != g)
    throw parameter_error("beta_mask shape mismatch");
  if (sigma_pattern.rows() != d || sigma_pattern.cols() != d)
    throw parameter_error("sigma_pattern shape mismatch");
  if (dof_mode == DofMode::fixed && !(fixed_dof > kDofFloor))
    throw parameter_error("fixed dof must exceed the floor");
  for (int r : normalized_rows(layout)) {
    if (sigma_pattern(r, r))
      throw parameter_error("normalized diagonal cannot be estimated");
  }
}

ModelSpec ModelSpec::dense(OutcomeLayout layout, int s, int g) {
  ModelSpec spec;
  spec.layout = std::move(layout);
  spec.s = s;
  spec.g = g;
  const int h = spec.layout.H;
  const int ik = spec.layout.total_alternatives();
  const int d = spec.layout.diff_dim();
  spec.gamma_mask = BoolMatrix::Constant(h, s, true);
  spec.beta_mask = BoolMatrix::Constant(ik, g, true);
  spec.sigma_pattern = BoolMatrix::Constant(d, d, false);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) spec.sigma_pattern(i, j) = true;
  for (int r : normalized_rows(spec.layout)) spec.sigma_pattern(r, r) = false;
  return spec;
}

int ModelSpec::n_free() const {
  int n = static_cast<int>(gamma_mask.count() + beta_mask.count());
  const int d = layout.diff_dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      if (sigma_pattern(i, j)) ++n;
  if (dof_mode == DofMode::linked) n += dof_covariates;
  return n;
}

std::vector<std::string> ModelSpec::parameter_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < gamma_mask.rows(); ++i)
    for (int j = 0; j < gamma_mask.cols(); ++j)
      if (gamma_mask(i, j))
        names.push_back("gamma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  for (int i = 0; i < beta_mask.rows(); ++i)
    for (int j = 0; j < beta_mask.cols(); ++j)
      if (beta_mask(i, j))
        names.push_back("beta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  const int d = layout.diff_dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      if (sigma_pattern(i, j))
        names.push_back("chol_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  if (dof_mode == DofMode::linked)
    for (int j = 0; j < dof_covariates; ++j)
      names.push_back("dof_" + std::to_string(j + 1));
  return names;
}

ParameterVector ParameterVector::zero(const ModelSpec& spec) {
  ParameterVector theta;
  const int h = spec.layout.H;
  const int ik = spec.layout.total_alternatives();
  const int d = spec.layout.diff_dim();
  theta.gamma = Matrix::Zero(h, spec.s);
  theta.beta = Matrix::Zero(ik, spec.g);
  theta.l_raw = Matrix::Identity(d, d);
  if (spec.dof_mode == DofMode::linked)
    theta.dof_coef = Vector::Zero(spec.dof_covariates);
  return theta;
}

Vector pack(const ModelSpec& spec, const ParameterVector& theta) {
  Vector out(spec.n_free());
  int k = 0;
  for (int i = 0; i < spec.gamma_mask.rows(); ++i)
    for (int j = 0; j < spec.gamma_mask.cols(); ++j)
      if (spec.gamma_mask(i, j)) out[k++] = theta.gamma(i, j);
  for (int i = 0; i < spec.beta_mask.rows(); ++i)
    for (int j = 0; j < spec.beta_mask.cols(); ++j)
      if (spec.beta_mask(i, j)) out[k++] = theta.beta(i, j);
  const int d = spec.layout.diff_dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      if (spec.sigma_pattern(i, j)) out[k++] = theta.l_raw(i, j);
  if (spec.dof_mode == DofMode::linked)
    for (int j = 0; j < spec.dof_covariates; ++j) out[k++] = theta.dof_coef[j];
  return out;
}

ParameterVector unpack(const ModelSpec& spec, const Vector& packed,
                       const ParameterVector& baseline) {
  ParameterVector theta = baseline;
  int k = 0;
  for (int i = 0; i < spec.gamma_mask.rows(); ++i)
    for (int j = 0; j < spec.gamma_mask.cols(); ++j)
      if (spec.gamma_mask(i, j)) theta.gamma(i, j) = packed[k++];
  for (int i = 0; i < spec.beta_mask.rows(); ++i)
    for (int j = 0; j < spec.beta_mask.cols(); ++j)
      if (spec.beta_mask(i, j)) theta.beta(i, j) = packed[k++];
  const int d = spec.layout.diff_dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      if (spec.sigma_pattern(i, j)) theta.l_raw(i, j) = packed[k++];
  if (spec.dof_mode == DofMode::linked)
    for (int j = 0; j < spec.dof_covariates; ++j) theta.dof_coef[j] = packed[k++];
  return theta;
}

double dof_link(const ModelSpec& spec, const Vector& dof_coef,
                const Vector& dof_x) {
  if (spec.dof_mode == DofMode::fixed) return spec.fixed_dof;
  if (dof_coef.size() != dof_x.size())
    throw parameter_error("dof_link covariate length mismatch");
  return std::max(kDofFloor, std::exp(dof_coef.dot(dof_x)));
}

Matrix sigma_bar(const ModelSpec& spec, const ParameterVector& theta) {
  const auto norm_rows = normalized_rows(spec.layout);
  const int d = spec.layout.diff_dim();
  for (int i = 0; i < d; ++i) {
    bool normalized = std::find(norm_rows.begin(), norm_rows.end(), i) != norm_rows.end();
    if (!normalized && !(theta.l_raw(i, i) > 1e-8))
      throw parameter_error("Cholesky diagonal not positive");
  }
  const Matrix l = reparam_cholesky(theta.l_raw, norm_rows);
  return l * l.transpose();
}

JointDist assemble_joint(const ParameterVector& theta, const Observation& obs,
                         const ModelSpec& spec) {
  const int h = spec.layout.H;
  const int ik = spec.layout.total_alternatives();
  JointDist joint;
  joint.b.resize(h + ik);
  for (int i = 0; i < h; ++i) joint.b[i] = theta.gamma.row(i).dot(obs.x.row(i));
  for (int k = 0; k < ik; ++k)
    joint.b[h + k] = theta.beta.row(k).dot(obs.z.row(k));
  const Matrix dm = build_dm(spec.layout);
  joint.sigma = dm * sigma_bar(spec, theta) * dm.transpose();
  joint.dof = dof_link(spec, theta.dof_coef, obs.dof_x);
  return joint;
}

DifferencedDist difference(const Vector& b, const Matrix& sigma,
                           const Observation& obs,
                           const OutcomeLayout& layout) {
  const Matrix m = build_m(layout, obs.chosen);
  return {m * b, m * sigma * m.transpose()};
}

ConditionalChoice conditional_choice(const Vector& b_tilde,
                                     const Matrix& sigma_tilde, const Vector& y,
                                     double dof, int h) {
  const int du = static_cast<int>(b_tilde.size()) - h;
  ConditionalChoice cond;
  cond.dof_arrow = dof + h;
  if (h == 0) {
    cond.b_arrow = b_tilde;
    cond.sigma_arrow = sigma_tilde;
    cond.alpha = 0.0;
    return cond;
  }
  const Matrix sig_y = sigma_tilde.topLeftCorner(h, h);
  const Matrix cross = sigma_tilde.topRightCorner(h, du);
  Eigen::LLT<Matrix> llt(sig_y);
  if (llt.info() != Eigen::Success)
    throw parameter_error("conditional_choice: continuous block not invertible");
  const Vector resid = y - b_tilde.head(h);
  const Vector siginv_resid = llt.solve(resid);
  cond.alpha = resid.dot(siginv_resid);
  cond.b_arrow = b_tilde.tail(du) + cross.transpose() * siginv_resid;
  const Matrix schur =
      sigma_tilde.bottomRightCorner(du, du) - cross.transpose() * llt.solve(cross);
  cond.sigma_arrow = ((dof + cond.alpha) / (dof + h)) * schur;
  return cond;
}

ProbEstimate choice_prob(const ConditionalChoice& cond, const QmcConfig& qmc) {
  const int p = static_cast<int>(cond.b_arrow.size());
  Rectangle rect{Vector::Constant(p, -kInf), -cond.b_arrow};
  MvtDist dist{Vector::Zero(p), cond.sigma_arrow, cond.dof_arrow};
  return mvtcd_sov(rect, dist, qmc);
}

LoglikEvaluator::LoglikEvaluator(const ModelSpec& spec,
                                 const ParameterVector& theta,
                                 const QmcConfig& qmc)
    : spec_(spec), theta_(theta), qmc_(qmc) {
  spec_.validate();
  sigma_bar_ = sigma_bar(spec_, theta_);
  dm_ = build_dm(spec_.layout);
  sigma_ = dm_ * sigma_bar_ * dm_.transpose();

  const int i = spec_.layout.num_nominal();
  const auto& counts = spec_.layout.alt_counts;
  std::vector<int> offsets(i, 0);
  for (int n = 1; n < i; ++n) offsets[n] = offsets[n - 1] + counts[n - 1] - 1;
  if (i <= 2) {
    std::vector<int> all(spec_.layout.diff_dim() - spec_.layout.H);
    std::iota(all.begin(), all.end(), 0);
    pair_rows_.push_back(all);
  } else {
    for (int a = 0; a < i; ++a) {
      for (int b = a + 1; b < i; ++b) {
        std::vector<int> rows;
        for (int r = 0; r < counts[a] - 1; ++r) rows.push_back(offsets[a] + r);
        for (int r = 0; r < counts[b] - 1; ++r) rows.push_back(offsets[b] + r);
        pair_rows_.push_back(rows);
      }
    }
  }
  int max_p = 1;
  for (const auto& rows : pair_rows_)
    max_p = std::max(max_p, static_cast<int>(rows.size()));
  points_.resize(max_p + 1);
  for (const auto& rows : pair_rows_) {
    const int p = static_cast<int>(rows.size());
    if (p >= 2 && points_[p].size() == 0) points_[p] = halton(qmc_, p - 1);
  }
}

const LoglikEvaluator::TupleCache& LoglikEvaluator::tuple_cache(
    const std::vector<int>& chosen) const {
  for (const auto& tc : tuples_)
    if (tc.chosen == chosen) return tc;
  TupleCache tc;
  tc.chosen = chosen;
  tc.m = build_m(spec_.layout, chosen);
  tc.sigma_tilde = tc.m * sigma_ * tc.m.transpose();
  const int h = spec_.layout.H;
  if (h > 0) {
    tc.sig_y_llt.compute(tc.sigma_tilde.topLeftCorner(h, h));
    if (tc.sig_y_llt.info() != Eigen::Success)
      throw parameter_error("continuous covariance block not positive definite");
    tc.logdet_sig_y =
        2.0 * Matrix(tc.sig_y_llt.matrixL()).diagonal().array().log().sum();
  }
  for (const auto& rows : pair_rows_) {
    const int p = static_cast<int>(rows.size());
    Matrix sub(p, p);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c)
        sub(r, c) = tc.sigma_tilde(h + rows[r], h + rows[c]);
    Matrix regress(p, h);
    if (h > 0) {
      Matrix cross(h, p);
      for (int c = 0; c < p; ++c)
        cross.col(c) = tc.sigma_tilde.block(0, h + rows[c], h, 1);
      regress = cross.transpose() * tc.sig_y_llt.solve(Matrix::Identity(h, h));
      sub -= regress * cross;
    }
    Eigen::LLT<Matrix> llt(sub);
    if (llt.info() != Eigen::Success)
      throw parameter_error("conditional choice covariance not positive definite");
    tc.schur_chol.push_back(Matrix(llt.matrixL()));
    tc.regress.push_back(std::move(regress));
  }
  tuples_.push_back(std::move(tc));
  return tuples_.back();
}

void LoglikEvaluator::warm_cache(const Dataset& data) const {
  for (const auto& obs : data) (void)tuple_cache(obs.chosen);
}

double LoglikEvaluator::pair_logprob(const TupleCache& tc, int pair,
                                     const Vector& b_arrow_all, double alpha,
                                     double dof) const {
  const int h = spec_.layout.H;
  const auto& rows = pair_rows_[pair];
  const int p = static_cast<int>(rows.size());
  Vector upper(p);
  for (int r = 0; r < p; ++r) upper[r] = -b_arrow_all[rows[r]];
  const double c = (dof + alpha) / (dof + h);
  const Matrix chol = std::sqrt(c) * tc.schur_chol[pair];
  Rectangle rect{Vector::Constant(p, -kInf), upper};
  double prob;
  if (p == 1) {
    prob = t_cdf(upper[0] / chol(0, 0), dof + h);
  } else {
    prob = sov_mean(rect, chol, dof + h, points_[p]);
  }
  if (!(prob > 0.0)) return -kInf;
  return std::log(prob);
}

double LoglikEvaluator::obs_loglik(const Observation& obs) const {
  const int h = spec_.layout.H;
  const int ik = spec_.layout.total_alternatives();
  const double dof = dof_link(spec_, theta_.dof_coef, obs.dof_x);
  const TupleCache& tc = tuple_cache(obs.chosen);

  Vector b(h + ik);
  for (int i = 0; i < h; ++i) b[i] = theta_.gamma.row(i).dot(obs.x.row(i));
  for (int k = 0; k < ik; ++k) b[h + k] = theta_.beta.row(k).dot(obs.z.row(k));
  const Vector b_tilde = tc.m * b;

  double loglik = 0.0;
  double alpha = 0.0;
  Vector siginv_resid;
  if (h > 0) {
    const Vector resid = obs.y - b_tilde.head(h);
    siginv_resid = tc.sig_y_llt.solve(resid);
    alpha = resid.dot(siginv_resid);
    loglik += log_kappa(dof, h) - 0.5 * tc.logdet_sig_y -
              0.5 * (dof + h) * std::log1p(alpha / dof);
  }

  const int du = spec_.layout.diff_dim() - h;
  const Vector b_arrow_all = b_tilde.tail(du);
  for (int pair = 0; pair < n_pairs(); ++pair) {
    const auto& rows = pair_rows_[pair];
    Vector full = b_arrow_all;
    if (h > 0) {
      const Vector shift = tc.regress[pair] * (obs.y - b_tilde.head(h));
      for (size_t r = 0; r < rows.size(); ++r) full[rows[r]] += shift[r];
    }
    const double lp = pair_logprob(tc, pair, full, alpha, dof);
    if (lp == -kInf) return -kInf;
    loglik += lp;
  }
  return std::isfinite(loglik) ? loglik : -kInf;
}

double LoglikEvaluator::obs_choice_prob(const Observation& obs) const {
  const int h = spec_.layout.H;
  const int ik = spec_.layout.total_alternatives();
  const double dof = dof_link(spec_, theta_.dof_coef, obs.dof_x);
  const TupleCache& tc = tuple_cache(obs.chosen);
  Vector b(h + ik);
  for (int i = 0; i < h; ++i) b[i] = theta_.gamma.row(i).dot(obs.x.row(i));
  for (int k = 0; k < ik; ++k) b[h + k] = theta_.beta.row(k).dot(obs.z.row(k));
  const Vector b_tilde = tc.m * b;
  double alpha = 0.0;
  Vector resid;
  if (h > 0) {
    resid = obs.y - b_tilde.head(h);
    alpha = resid.dot(tc.sig_y_llt.solve(resid));
  }
  const int du = spec_.layout.diff_dim() - h;
  const Vector b_arrow_all = b_tilde.tail(du);
  double logp = 0.0;
  for (int pair = 0; pair < n_pairs(); ++pair) {
    const auto& rows = pair_rows_[pair];
    Vector full = b_arrow_all;
    if (h > 0) {
      const Vector shift = tc.regress[pair] * resid;
      for (size_t r = 0; r < rows.size(); ++r) full[rows[r]] += shift[r];
    }
    const double lp = pair_logprob(tc, pair, full, alpha, dof);
    if (lp == -kInf) return 0.0;
    logp += lp;
  }
  return std::exp(logp);
}

double obs_loglik(const ParameterVector& theta, const Observation& obs,
                  const ModelSpec& spec, const QmcConfig& qmc) {
  LoglikEvaluator eval(spec, theta, qmc);
  return eval.obs_loglik(obs);
}

SampleLoglik sample_loglik(const ParameterVector& theta, const Dataset& data,
                           const ModelSpec& spec, const QmcConfig& qmc) {
  if (data.empty()) throw parameter_error("sample_loglik: empty dataset");
  LoglikEvaluator eval(spec, theta, qmc);
  eval.warm_cache(data);
  Vector per(data.size());
  const int n = static_cast<int>(data.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) per[i] = eval.obs_loglik(data[i]);
  // order-independent reduction: sum in sorted order
  std::vector<double> vals(per.data(), per.data() + per.size());
  std::sort(vals.begin(), vals.end());
  double total = 0.0;
  for (double v : vals) total += v;
  return {total, per};
}

std::vector<std::string> report_names(const ModelSpec& spec) {
  std::vector<std::string> names;
  for (int i = 0; i < spec.gamma_mask.rows(); ++i)
    for (int j = 0; j < spec.gamma_mask.cols(); ++j)
      if (spec.gamma_mask(i, j))
        names.push_back("gamma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  for (int i = 0; i < spec.beta_mask.rows(); ++i)
    for (int j = 0; j < spec.beta_mask.cols(); ++j)
      if (spec.beta_mask(i, j))
        names.push_back("beta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  const int d = spec.layout.diff_dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      if (spec.sigma_pattern(i, j))
        names.push_back("sigma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  if (spec.dof_mode == DofMode::linked) {
    if (spec.dof_covariates == 1) {
      names.push_back("delta");
    } else {
      for (int j = 0; j < spec.dof_covariates; ++j)
        names.push_back("dof_" + std::to_string(j + 1));
    }
  }
  return names;
}

Vector report_values(const ModelSpec& spec, const ParameterVector& theta) {
  std::vector<double> vals;
  for (int i = 0; i < spec.gamma_mask.rows(); ++i)
    for (int j = 0; j < spec.gamma_mask.cols(); ++j)
      if (spec.gamma_mask(i, j)) vals.push_back(theta.gamma(i, j));
  for (int i = 0; i < spec.beta_mask.rows(); ++i)
    for (int j = 0; j < spec.beta_mask.cols(); ++j)
      if (spec.beta_mask(i, j)) vals.push_back(theta.beta(i, j));
  const Matrix sb = sigma_bar(spec, theta);
  const int d = spec.layout.diff_dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      if (spec.sigma_pattern(i, j)) vals.push_back(sb(i, j));
  if (spec.dof_mode == DofMode::linked) {
    if (spec.dof_covariates == 1) {
      vals.push_back(std::max(kDofFloor, std::exp(theta.dof_coef[0])));
    } else {
      for (int j = 0; j < spec.dof_covariates; ++j)
        vals.push_back(theta.dof_coef[j]);
    }
  }
  return Eigen::Map<Vector>(vals.data(), static_cast<int>(vals.size()));
}

}  // namespace gcmt

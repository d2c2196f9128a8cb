#include "gcmt/simulate.hpp"

#include <cmath>
#include <random>

namespace gcmt {

std::uint64_t derive_seed(std::uint64_t base, std::uint32_t stream,
                          std::uint64_t index) {
  // splitmix64 finalizer over a stream/index tagged state
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + stream) + index;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void DgpSpec::validate() const {
  spec.validate();
  if (structural_z_col >= 0) {
    if (spec.layout.H == 0)
      throw parameter_error("structural link needs a continuous outcome");
    if (structural_outcome < 0 || structural_outcome >= spec.layout.H)
      throw parameter_error("structural_outcome out of range");
    if (structural_z_col >= spec.g)
      throw parameter_error("structural_z_col out of range");
  }
  for (int c : indicator_cols) {
    if (c < 0 || (c >= spec.s && c >= spec.g))
      throw parameter_error("indicator column out of range");
  }
  (void)sigma_bar(spec, theta_true);
}

DgpSpec commute_density_dgp(double dof) {
  DgpSpec dgp;
  OutcomeLayout layout{1, {5}};
  dgp.spec = ModelSpec::dense(layout, 4, 5);
  dgp.spec.dof_mode = DofMode::linked;
  dgp.spec.dof_covariates = 1;

  // base alternative (highest density band) carries no coefficients; the
  // education indicator enters the continuous equation only
  dgp.spec.beta_mask.row(0).setConstant(false);
  dgp.spec.beta_mask.col(3).setConstant(false);

  // estimated covariance entries: continuous variance, the cross-block
  // column, and the free choice-block variances
  dgp.spec.sigma_pattern.setConstant(false);
  dgp.spec.sigma_pattern(0, 0) = true;
  for (int r = 1; r < 5; ++r) dgp.spec.sigma_pattern(r, 0) = true;
  for (int r = 2; r < 5; ++r) dgp.spec.sigma_pattern(r, r) = true;

  dgp.theta_true = ParameterVector::zero(dgp.spec);
  dgp.theta_true.gamma << 1.0, 0.5, 0.75, -0.5;
  dgp.theta_true.beta << 0.0, 0.0, 0.0, 0.0, 0.0,
      -1.5, 1.0, 0.9, 0.0, 1.0,
      -1.3, 0.9, 0.8, 0.0, 0.9,
      -1.2, 0.8, 0.7, 0.0, 0.8,
      -1.0, 0.7, 0.6, 0.0, 0.7;

  Matrix sig(5, 5);
  sig << 1.5, 0.3, 0.4, 0.6, 0.5,
      0.3, 1.0, 0.5, 0.5, 0.5,
      0.4, 0.5, 1.1, 0.5, 0.5,
      0.6, 0.5, 0.5, 1.2, 0.5,
      0.5, 0.5, 0.5, 0.5, 1.3;
  const Matrix l = Eigen::LLT<Matrix>(sig).matrixL();
  Matrix l_raw = l;
  // the normalized row stores pre-normalization values; dividing by the
  // diagonal makes the reparametrization reproduce the row exactly
  for (int r : normalized_rows(layout)) {
    for (int j = 0; j < r; ++j) l_raw(r, j) = l(r, j) / l(r, r);
    l_raw(r, r) = 1.0;
  }
  dgp.theta_true.l_raw = l_raw;
  dgp.theta_true.dof_coef = Vector::Constant(1, std::log(dof));

  dgp.indicator_cols = {1, 2, 3};
  dgp.structural_outcome = 0;
  dgp.structural_z_col = 4;
  dgp.validate();
  return dgp;
}

Dataset generate_dataset(const DgpSpec& dgp, int n, std::uint64_t seed) {
  dgp.validate();
  const ModelSpec& spec = dgp.spec;
  const int h = spec.layout.H;
  const int ik = spec.layout.total_alternatives();
  const int i = spec.layout.num_nominal();
  const Matrix sig_bar = sigma_bar(spec, dgp.theta_true);
  const Matrix chol = Eigen::LLT<Matrix>(sig_bar).matrixL();
  const Matrix dm = build_dm(spec.layout);
  const int d = spec.layout.diff_dim();

  auto is_indicator = [&](int c) {
    for (int ic : dgp.indicator_cols)
      if (ic == c) return true;
    return false;
  };

  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset data;
  data.reserve(n);
  for (int r = 0; r < n; ++r) {
    Observation obs;
    obs.dof_x = (spec.dof_mode == DofMode::linked)
                    ? Vector::Ones(spec.dof_covariates)
                    : Vector();
    const double dof = dof_link(spec, dgp.theta_true.dof_coef, obs.dof_x);

    std::vector<double> ind;
    for (size_t c = 0; c < dgp.indicator_cols.size(); ++c)
      ind.push_back(unif(eng) > 0.5 ? 1.0 : 0.0);
    auto indicator_value = [&](int c) {
      for (size_t j = 0; j < dgp.indicator_cols.size(); ++j)
        if (dgp.indicator_cols[j] == c) return ind[j];
      return 1.0;
    };

    obs.x.resize(h, spec.s);
    for (int row = 0; row < h; ++row)
      for (int c = 0; c < spec.s; ++c)
        obs.x(row, c) = is_indicator(c) ? indicator_value(c) : 1.0;

    // joint error: differenced-scale draw pushed through D_m
    Vector z(d);
    for (int j = 0; j < d; ++j) z[j] = normal(eng);
    std::gamma_distribution<double> gamma_draw(0.5 * dof, 2.0);
    const double w = gamma_draw(eng);
    const Vector err = dm * (chol * z * std::sqrt(dof / w));

    obs.y.resize(h);
    for (int row = 0; row < h; ++row)
      obs.y[row] = dgp.theta_true.gamma.row(row).dot(obs.x.row(row)) + err[row];

    obs.z.resize(ik, spec.g);
    for (int k = 0; k < ik; ++k) {
      for (int c = 0; c < spec.g; ++c) {
        if (c == dgp.structural_z_col)
          obs.z(k, c) = obs.y[dgp.structural_outcome];
        else
          obs.z(k, c) = is_indicator(c) ? indicator_value(c) : 1.0;
      }
    }

    int base = 0;
    for (int m = 0; m < i; ++m) {
      const int k = spec.layout.alt_counts[m];
      int best = 0;
      double best_u = -kInf;
      for (int alt = 0; alt < k; ++alt) {
        const int row = base + alt;
        const double u =
            dgp.theta_true.beta.row(row).dot(obs.z.row(row)) + err[h + row];
        if (u > best_u) {
          best_u = u;
          best = alt;
        }
      }
      obs.chosen.push_back(best + 1);
      base += k;
    }
    data.push_back(std::move(obs));
  }
  return data;
}

McReport compute_metrics(const Matrix& estimates, const Matrix& ases,
                         const Vector& truth,
                         const std::vector<std::string>& names) {
  const int r = static_cast<int>(estimates.rows());
  const int p = static_cast<int>(estimates.cols());
  if (ases.rows() != r || ases.cols() != p || truth.size() != p ||
      static_cast<int>(names.size()) != p)
    throw parameter_error("compute_metrics dimension mismatch");
  if (r < 2) throw parameter_error("compute_metrics needs at least 2 resamples");

  McReport report;
  report.resamples = r;
  for (int j = 0; j < p; ++j) {
    McRow row;
    row.name = names[j];
    row.true_value = truth[j];
    row.mev = estimates.col(j).mean();
    row.mab = std::abs(truth[j] - row.mev);
    row.apb = (truth[j] != 0.0) ? std::abs(row.mab / truth[j]) * 100.0
                                : std::nan("");
    row.fsse = std::sqrt(
        (estimates.col(j).array() - row.mev).square().sum() / (r - 1));
    row.ase = ases.col(j).mean();
    row.ase_fsse_ratio = (row.fsse > 0.0) ? row.ase / row.fsse : std::nan("");
    int cover = 0, reject = 0;
    for (int rr = 0; rr < r; ++rr) {
      const double est = estimates(rr, j), se = ases(rr, j);
      if (std::abs(est - truth[j]) <= 1.96 * se) ++cover;
      if (se > 0.0 && std::abs(est / se) > 1.96) ++reject;
    }
    row.cp = static_cast<double>(cover) / r;
    row.power = static_cast<double>(reject) / r;
    report.rows.push_back(std::move(row));
  }
  return report;
}

McReport run_monte_carlo(const DgpSpec& dgp, int resamples, int n,
                         std::uint64_t seed, const EstimatorFn& estimator) {
  dgp.validate();
  if (resamples < 2) throw parameter_error("run_monte_carlo needs >= 2 resamples");
  const std::vector<std::string> names = report_names(dgp.spec);
  const Vector truth = report_values(dgp.spec, dgp.theta_true);
  const int p = static_cast<int>(truth.size());

  std::vector<Vector> est_rows, ase_rows;
  int failures = 0;
  for (int r = 0; r < resamples; ++r) {
    const Dataset data = generate_dataset(dgp, n, derive_seed(seed, 1, r));
    const auto fit = estimator(data, derive_seed(seed, 2, r));
    if (!fit || !fit->first.allFinite() || !fit->second.allFinite()) {
      ++failures;
      continue;
    }
    est_rows.push_back(fit->first);
    ase_rows.push_back(fit->second);
  }
  if (est_rows.empty())
    throw std::runtime_error("run_monte_carlo: every resample failed");
  if (static_cast<int>(est_rows.size()) < 2)
    throw std::runtime_error("run_monte_carlo: fewer than 2 usable resamples");

  Matrix estimates(est_rows.size(), p), ases(ase_rows.size(), p);
  for (size_t r = 0; r < est_rows.size(); ++r) {
    estimates.row(r) = est_rows[r].transpose();
    ases.row(r) = ase_rows[r].transpose();
  }
  McReport report = compute_metrics(estimates, ases, truth, names);
  report.resamples = resamples;
  report.failures = failures;
  return report;
}

McReport run_monte_carlo(const DgpSpec& dgp, int resamples, int n,
                         std::uint64_t seed, const EstimateOptions& options) {
  EstimatorFn estimator =
      [&](const Dataset& data,
          std::uint64_t) -> std::optional<std::pair<Vector, Vector>> {
    try {
      const ParameterVector start = starting_values(dgp.spec, data);
      const EstimateResult res = estimate(dgp.spec, data, start, options);
      if (!res.converged || !std::isfinite(res.loglik)) return std::nullopt;
      return std::make_pair(res.report_est, res.report_se);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  return run_monte_carlo(dgp, resamples, n, seed, estimator);
}

}  // namespace gcmt

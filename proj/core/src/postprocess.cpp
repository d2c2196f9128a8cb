#include "gcmt/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gcmt/simulate.hpp"

namespace gcmt {

PredictResult predict_probs(const LoglikEvaluator& eval,
                            const Observation& obs) {
  const OutcomeLayout& layout = eval.layout();
  PredictResult result;
  Observation probe = obs;
  for (int m = 0; m < layout.num_nominal(); ++m) {
    const int k = layout.alt_counts[m];
    Vector raw(k);
    for (int a = 1; a <= k; ++a) {
      probe.chosen[m] = a;
      raw[a - 1] = eval.obs_choice_prob(probe);
    }
    probe.chosen[m] = obs.chosen[m];
    const double sum = raw.sum();
    result.raw_sums.push_back(sum);
    result.probs.push_back(sum > 0.0 ? Vector(raw / sum) : raw);
  }
  return result;
}

PredictResult predict_probs(const ParameterVector& theta,
                            const Observation& obs, const ModelSpec& spec,
                            const QmcConfig& qmc) {
  LoglikEvaluator eval(spec, theta, qmc);
  return predict_probs(eval, obs);
}

ElasticityReport elasticity(const ParameterVector& theta, const Dataset& data,
                            const ModelSpec& spec, int z_col,
                            double pct_change, const QmcConfig& qmc,
                            const std::vector<int>& group_ids,
                            const std::vector<std::string>& group_labels,
                            int outcome) {
  spec.validate();
  if (z_col < 0 || z_col >= spec.g)
    throw parameter_error("elasticity: attribute column out of range");
  if (outcome < 0 || outcome >= spec.layout.num_nominal())
    throw parameter_error("elasticity: outcome index out of range");
  std::vector<int> groups = group_ids;
  if (groups.empty()) groups.assign(data.size(), 0);
  if (groups.size() != data.size())
    throw parameter_error("elasticity: group assignment length mismatch");

  const int n_groups = groups.empty()
                           ? 1
                           : *std::max_element(groups.begin(), groups.end()) + 1;
  const int k = spec.layout.alt_counts[outcome];
  LoglikEvaluator eval(spec, theta, qmc);

  Matrix sums = Matrix::Zero(n_groups, k);
  std::vector<int> counts(n_groups, 0);
  const double factor = 1.0 + pct_change / 100.0;
  for (size_t i = 0; i < data.size(); ++i) {
    const Vector base = predict_probs(eval, data[i]).probs[outcome];
    Observation perturbed = data[i];
    perturbed.z.col(z_col) *= factor;
    const Vector after = predict_probs(eval, perturbed).probs[outcome];
    const int g = groups[i];
    if (g < 0) continue;
    sums.row(g) += (after - base).transpose();
    ++counts[g];
  }

  ElasticityReport report;
  for (int g = 0; g < n_groups; ++g) {
    const std::string label = (g < static_cast<int>(group_labels.size()))
                                  ? group_labels[g]
                                  : "group_" + std::to_string(g);
    if (counts[g] == 0) {
      report.notes.push_back(label + ": empty group, omitted");
      continue;
    }
    report.group_labels.push_back(label);
    report.group_sizes.push_back(counts[g]);
    Matrix grown(report.group_labels.size(), k);
    grown.topRows(report.mean_change.rows()) = report.mean_change;
    grown.bottomRows(1) = sums.row(g) / counts[g];
    report.mean_change = grown;
  }
  return report;
}

double wtp_log_attribute(double beta_attr, double beta_price, double attr_value,
                         double attr_unit_scale, double price_unit_scale) {
  if (beta_price == 0.0)
    throw parameter_error("wtp_log_attribute: zero price coefficient");
  if (!(attr_value * attr_unit_scale > 0.0))
    throw parameter_error("wtp_log_attribute: attribute value must be positive");
  const double marginal_utility = beta_attr / (attr_value * attr_unit_scale);
  return marginal_utility * price_unit_scale / std::abs(beta_price);
}

double wtp_linear_attribute(double beta_attr, double beta_cost,
                            double unit_scale) {
  if (beta_cost == 0.0)
    throw parameter_error("wtp_linear_attribute: zero cost coefficient");
  return std::abs(beta_attr / beta_cost) * unit_scale;
}

BrierScores brier_score(const Matrix& probs, const std::vector<int>& chosen) {
  const int n = static_cast<int>(probs.rows());
  const int k = static_cast<int>(probs.cols());
  if (static_cast<int>(chosen.size()) != n)
    throw parameter_error("brier_score: chosen length mismatch");
  BrierScores scores;
  scores.root_variant = Vector::Zero(k);
  scores.classical_mean_sq = Vector::Zero(k);
  for (int i = 0; i < n; ++i) {
    if (chosen[i] < 1 || chosen[i] > k)
      throw parameter_error("brier_score: chosen index out of range");
    for (int a = 0; a < k; ++a) {
      const double p = probs(i, a);
      if (p < 0.0 || p > 1.0)
        throw parameter_error("brier_score: probability outside [0,1]");
      const double r = (chosen[i] == a + 1) ? 1.0 : 0.0;
      scores.root_variant[a] += std::sqrt(std::abs(r - p));
      scores.classical_mean_sq[a] += (r - p) * (r - p);
    }
  }
  if (n > 0) scores.classical_mean_sq /= n;
  return scores;
}

namespace {

void score_partition(const LoglikEvaluator& eval, const Dataset& data,
                     const std::vector<int>& idx, int outcome, int k,
                     Vector& root, Vector& classical) {
  Matrix probs(idx.size(), k);
  std::vector<int> chosen;
  for (size_t r = 0; r < idx.size(); ++r) {
    probs.row(r) = predict_probs(eval, data[idx[r]]).probs[outcome].transpose();
    chosen.push_back(data[idx[r]].chosen[outcome]);
  }
  const BrierScores scores = brier_score(probs, chosen);
  root = scores.root_variant / static_cast<double>(idx.size());
  classical = scores.classical_mean_sq;
}

}  // namespace

CvReport cross_validate(const Dataset& data, int folds, const ModelSpec& spec,
                        const EstimateOptions& options, std::uint64_t seed,
                        int outcome, double train_frac) {
  spec.validate();
  if (folds < 2) throw parameter_error("cross_validate needs >= 2 folds");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw parameter_error("cross_validate: train_frac must be in (0,1)");
  const int n = static_cast<int>(data.size());
  const int n_train = static_cast<int>(std::floor(train_frac * n));
  if (n_train < 1 || n_train >= n)
    throw parameter_error("cross_validate: dataset too small for the split");
  const int k = spec.layout.alt_counts[outcome];

  CvReport report;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 eng(derive_seed(seed, 3, f));
    std::shuffle(idx.begin(), idx.end(), eng);
    const std::vector<int> train_idx(idx.begin(), idx.begin() + n_train);
    const std::vector<int> test_idx(idx.begin() + n_train, idx.end());

    CvFold fold;
    try {
      Dataset train;
      for (int i : train_idx) train.push_back(data[i]);
      const ParameterVector start = starting_values(spec, train);
      const EstimateResult res = estimate(spec, train, start, options);
      if (!res.converged || !std::isfinite(res.loglik))
        throw std::runtime_error("estimation did not converge");
      LoglikEvaluator eval(spec, res.theta, options.qmc);
      score_partition(eval, data, train_idx, outcome, k, fold.in_root,
                      fold.in_classical);
      score_partition(eval, data, test_idx, outcome, k, fold.out_root,
                      fold.out_classical);
      fold.ok = true;
    } catch (const std::exception& e) {
      fold.ok = false;
      fold.note = e.what();
      ++report.failures;
    }
    report.folds.push_back(std::move(fold));
  }

  std::vector<const CvFold*> ok;
  for (const auto& fold : report.folds)
    if (fold.ok) ok.push_back(&fold);
  if (!ok.empty()) {
    auto summarize = [&](auto getter, Vector& mean, Vector& sd) {
      mean = Vector::Zero(k);
      for (const CvFold* fold : ok) mean += getter(*fold);
      mean /= static_cast<double>(ok.size());
      sd = Vector::Constant(k, std::nan(""));
      if (ok.size() >= 2) {
        sd.setZero();
        for (const CvFold* fold : ok)
          sd += (getter(*fold) - mean).cwiseAbs2();
        sd = (sd / (ok.size() - 1.0)).cwiseSqrt();
      }
    };
    summarize([](const CvFold& f) { return f.in_root; }, report.in_root_mean,
              report.in_root_std);
    summarize([](const CvFold& f) { return f.out_root; }, report.out_root_mean,
              report.out_root_std);
  }
  return report;
}

}  // namespace gcmt

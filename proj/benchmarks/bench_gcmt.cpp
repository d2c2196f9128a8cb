// hot-path benchmarks: rectangle probabilities across dimension, kernel
// tails, and draw counts, plus the full sample likelihood

#include <benchmark/benchmark.h>

#include <random>

#include "gcmt/model.hpp"
#include "gcmt/simulate.hpp"
#include "gcmt/tdist.hpp"

namespace {

gcmt::Matrix scale_matrix(int p) {
  gcmt::Matrix s = gcmt::Matrix::Constant(p, p, 0.4);
  s.diagonal().setConstant(1.0);
  return s;
}

gcmt::Rectangle upper_orthant(int p) {
  gcmt::Rectangle rect;
  rect.lower = gcmt::Vector::Constant(p, -gcmt::kInf);
  rect.upper = gcmt::Vector::Constant(p, 0.5);
  return rect;
}

void bm_mvtcd_sov(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const double dof = static_cast<double>(state.range(1));
  const int draws = static_cast<int>(state.range(2));
  gcmt::MvtDist dist;
  dist.mu = gcmt::Vector::Zero(p);
  dist.omega = scale_matrix(p);
  dist.dof = dof;
  const gcmt::Rectangle rect = upper_orthant(p);
  gcmt::QmcConfig qmc;
  qmc.n_draws = draws;
  for (auto _ : state)
    benchmark::DoNotOptimize(gcmt::mvtcd_sov(rect, dist, qmc).value);
}

void bm_t_quantile(benchmark::State& state) {
  const double dof = static_cast<double>(state.range(0));
  double u = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gcmt::t_inv_cdf(u, dof));
    u += 0.017;
    if (u >= 0.99) u = 0.01;
  }
}

void bm_sample_loglik(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int draws = static_cast<int>(state.range(1));
  const gcmt::DgpSpec dgp = gcmt::commute_density_dgp(12.0);
  const gcmt::Dataset data = gcmt::generate_dataset(dgp, n, 99);
  gcmt::QmcConfig qmc;
  qmc.n_draws = draws;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        gcmt::sample_loglik(dgp.theta_true, data, dgp.spec, qmc).total);
}

}  // namespace

BENCHMARK(bm_mvtcd_sov)
    ->ArgsProduct({{2, 4, 8}, {2, 12, 300}, {100, 200, 500}})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_t_quantile)->Arg(2)->Arg(12)->Arg(300);
BENCHMARK(bm_sample_loglik)
    ->Args({100, 100})
    ->Args({100, 200})
    ->Args({500, 200})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

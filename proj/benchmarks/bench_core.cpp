#include <benchmark/benchmark.h>

#include <numeric>

#include "imst/factorize.hpp"
#include "imst/random.hpp"
#include "imst/select.hpp"
#include "imst/synthetic.hpp"
#include "imst/tree.hpp"

namespace {

Eigen::MatrixXd random_counts(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  imst::Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = static_cast<double>(rng.index(4));
  }
  return m;
}

void BM_NmfSweep(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd d = random_counts(n, 20, 1);
  imst::FactorizeConfig cfg;
  cfg.k = 6;
  auto f = imst::init_factors(n, 20, cfg);
  for (auto _ : state) {
    imst::update_sweep(d, f, cfg.epsilon_guard);
    benchmark::DoNotOptimize(f.U.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_NmfSweep)->Arg(200)->Arg(1428)->Arg(5000);

void BM_BestSplit(benchmark::State& state) {
  imst::SyntheticOptions opts;
  opts.rows = static_cast<std::size_t>(state.range(0));
  const auto data = imst::make_synthetic(opts);
  const auto table = imst::make_feature_table(data.dataset, imst::baseline_feature_names(data.dataset));
  std::vector<std::size_t> rows(table.rows());
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) {
    auto s = imst::best_split(table, rows, imst::Criterion::Gini);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BestSplit)->Arg(1000)->Arg(10000);

void BM_StagewisePath(benchmark::State& state) {
  const auto n = state.range(0);
  imst::Rng rng(3);
  Eigen::MatrixXd x(n, 5);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.normal();
    y(i) = x(i, 0) + 0.5 * x(i, 1) - 0.25 * x(i, 2) + rng.normal();
  }
  const auto scaling = imst::Standardization::fit(x, y);
  const Eigen::MatrixXd xs = scaling.apply(x);
  const Eigen::VectorXd yc = y.array() - scaling.y_mean;
  const double eps = imst::default_step_size(xs, yc);
  for (auto _ : state) {
    auto path = imst::stagewise_path(xs, yc, eps);
    benchmark::DoNotOptimize(path.steps.data());
  }
}
BENCHMARK(BM_StagewisePath)->Arg(1000)->Arg(10000);

void BM_TrainTree(benchmark::State& state) {
  imst::SyntheticOptions opts;
  opts.rows = static_cast<std::size_t>(state.range(0));
  const auto data = imst::make_synthetic(opts);
  const auto table = imst::make_feature_table(data.dataset, imst::baseline_feature_names(data.dataset));
  imst::GrowConfig cfg;
  for (auto _ : state) {
    auto t = imst::train_tree(table, cfg);
    benchmark::DoNotOptimize(t.nodes.data());
  }
}
BENCHMARK(BM_TrainTree)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

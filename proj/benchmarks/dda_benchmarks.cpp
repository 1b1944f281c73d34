#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

#include "dda/clustering.hpp"
#include "dda/losses.hpp"
#include "dda/network.hpp"
#include "dda/optimizer.hpp"

using namespace dda;

namespace {

NetworkArchitecture stock_arch(int in) {
  NetworkArchitecture a;
  a.input_dim = in;
  a.hidden_dims = {64, 64, 64, 64, 64};
  a.activation = Activation::LeakyReLU;
  return a;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  }
  return m;
}

void bm_forward(benchmark::State& state) {
  const auto rows = static_cast<Eigen::Index>(state.range(0));
  const NetworkWeights w = xavier_init(stock_arch(40), 1);
  const Eigen::MatrixXd X = random_matrix(rows, 40, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(w, X));
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(bm_forward)->Arg(512)->Arg(2000);

void bm_train_step(benchmark::State& state) {
  const auto rows = static_cast<Eigen::Index>(state.range(0));
  NetworkWeights w = xavier_init(stock_arch(40), 3);
  const Eigen::MatrixXd X = random_matrix(rows, 40, 4);
  const Eigen::VectorXd d = random_matrix(rows, 1, 5).col(0);
  for (auto _ : state) {
    const detail::ForwardCache cache = detail::forward_cached(w, X);
    const Eigen::VectorXd grad = ux_loss_output_grad({d, cache.output}, {1.0});
    const WeightGradients g = detail::backward_cached(w, cache, grad);
    w = sgd_step(w, g, 1e-3);
    benchmark::DoNotOptimize(w);
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(bm_train_step)->Arg(512)->Arg(2000);

void bm_loss(benchmark::State& state) {
  const auto rows = static_cast<Eigen::Index>(state.range(0));
  const Eigen::VectorXd d = random_matrix(rows, 1, 6).col(0);
  const Eigen::VectorXd dh = random_matrix(rows, 1, 7).col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ux_loss({d, dh}, {1.0}));
    benchmark::DoNotOptimize(achieved_completion_rate({d, dh}));
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(bm_loss)->Arg(2000)->Arg(20000);

void bm_kmeans(benchmark::State& state) {
  const auto rows = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd X = random_matrix(rows, 40, 8);
  const FeatureNormalizer n = fit_normalizer(X);
  const Eigen::MatrixXd Xn = n.apply(X);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans(Xn, 10, 9));
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(bm_kmeans)->Unit(benchmark::kMillisecond)->Arg(2000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();

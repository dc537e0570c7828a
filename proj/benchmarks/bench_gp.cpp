#include <benchmark/benchmark.h>

#include "bench_util.hpp"

using namespace kernelgp;

namespace {

Eigen::VectorXd labels_for(const RowMatrix& X) {
  Eigen::VectorXd y(X.rows());
  for (Index i = 0; i < X.rows(); ++i) y[i] = std::sin(3.0 * X(i, 0)) + X(i, 1);
  return y;
}

void BM_LossGradExact(benchmark::State& state) {
  const Index n = state.range(0);
  const RowMatrix X = bench::random_points(n, 2, 8);
  const Eigen::VectorXd y = labels_for(X);
  const PointSet P(X);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evaluate_loss_grad(KernelType::Matern32, P, y, {0.3, 1.0, 0.05}, InferenceMode::Exact, {}, 0).loss);
  }
}
BENCHMARK(BM_LossGradExact)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_LossGradIterative(benchmark::State& state) {
  const Index n = state.range(0);
  const RowMatrix X = bench::random_points(n, 2, 8);
  const Eigen::VectorXd y = labels_for(X);
  const PointSet P(X);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evaluate_loss_grad(KernelType::Matern32, P, y, {0.3, 1.0, 0.05}, InferenceMode::Iterative, {}, 0).loss);
  }
}
BENCHMARK(BM_LossGradIterative)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_PredictIterative(benchmark::State& state) {
  const Index n = state.range(0);
  const RowMatrix X = bench::random_points(n, 2, 8);
  const Eigen::VectorXd y = labels_for(X);
  const PointSet P(X), Ps(bench::random_points(100, 2, 9));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        predict(KernelType::Matern32, P, y, Ps, {0.3, 1.0, 0.05}, InferenceMode::Iterative).mean.data());
  }
}
BENCHMARK(BM_PredictIterative)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

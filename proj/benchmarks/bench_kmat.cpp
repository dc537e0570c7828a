#include <benchmark/benchmark.h>

#include "bench_util.hpp"

using namespace kernelgp;

namespace {

void BM_KernelEval(benchmark::State& state) {
  const auto kt = static_cast<KernelType>(state.range(0));
  const PointSet X(bench::random_points(512, 3, 1));
  for (auto _ : state) benchmark::DoNotOptimize(eval_kernel(kt, X, X, 0.3));
  state.SetItemsProcessed(state.iterations() * 512 * 512);
  state.SetLabel(std::string(kernel_name(kt)));
}
BENCHMARK(BM_KernelEval)->Arg(0)->Arg(1)->Arg(2);

// args: n, k (right-hand sides)
void BM_KhatMatmulOnTheFly(benchmark::State& state) {
  const Index n = state.range(0), k = state.range(1);
  const KernelEngine E(KernelType::Matern52, PointSet(bench::random_points(n, 3, 2)), {0.3, 1.0, 0.01},
                       EngineMode::on_the_fly());
  const Eigen::MatrixXd B = bench::random_block(n, k, 3);
  for (auto _ : state) benchmark::DoNotOptimize(E.khat_matmul(B));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_KhatMatmulOnTheFly)->Args({1000, 1})->Args({1000, 16})->Args({4000, 16})->Unit(benchmark::kMillisecond);

void BM_KhatMatmulDense(benchmark::State& state) {
  const Index n = state.range(0), k = state.range(1);
  const KernelEngine E(KernelType::Matern52, PointSet(bench::random_points(n, 3, 2)), {0.3, 1.0, 0.01},
                       EngineMode::dense());
  const Eigen::MatrixXd B = bench::random_block(n, k, 3);
  for (auto _ : state) benchmark::DoNotOptimize(E.khat_matmul(B));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_KhatMatmulDense)->Args({1000, 1})->Args({1000, 16})->Args({4000, 16})->Unit(benchmark::kMillisecond);

void BM_DerivativeMatmulL(benchmark::State& state) {
  const Index n = state.range(0);
  const KernelEngine E(KernelType::Gaussian, PointSet(bench::random_points(n, 3, 2)), {0.3, 1.0, 0.01},
                       EngineMode::on_the_fly());
  const Eigen::MatrixXd B = bench::random_block(n, 17, 3);
  for (auto _ : state) benchmark::DoNotOptimize(E.dkhat_matmul(ThetaTag::L, B));
}
BENCHMARK(BM_DerivativeMatmulL)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

#include <benchmark/benchmark.h>

#include "bench_util.hpp"

using namespace kernelgp;

namespace {

// arg: preconditioner rank (0 = none)
void BM_PcgSolve(benchmark::State& state) {
  const Index n = 2000, rank = state.range(0);
  const KernelEngine E(KernelType::Gaussian, PointSet(bench::random_points(n, 2, 4)), {0.5, 1.0, 0.01},
                       EngineMode::dense());
  const LinearOperator A = [&E](const Eigen::MatrixXd& B) { return E.khat_matmul(B); };
  const Preconditioner M = Preconditioner::build(E, rank > 0 ? rank : 1);
  const LinearOperator Minv = rank > 0 ? M.inverse_operator() : identity_operator();
  const Eigen::MatrixXd Y = bench::random_block(n, 8, 5);
  Index iterations = 0;
  for (auto _ : state) {
    const SolveReport r = pcg_solve(A, Minv, Y, 1e-6, 2000);
    iterations = r.traces[0].iterations;
    benchmark::DoNotOptimize(r.solution.data());
  }
  state.counters["cg_iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_PcgSolve)->Arg(0)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_PreconditionerBuild(benchmark::State& state) {
  const Index n = 2000;
  const KernelEngine E(KernelType::Gaussian, PointSet(bench::random_points(n, 2, 4)), {0.5, 1.0, 0.01},
                       EngineMode::on_the_fly());
  for (auto _ : state) benchmark::DoNotOptimize(Preconditioner::build(E, state.range(0)).rank());
}
BENCHMARK(BM_PreconditionerBuild)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_QuadratureLog(benchmark::State& state) {
  const Index n = 100;
  Eigen::MatrixXd G = bench::random_block(n, n, 6);
  const Eigen::MatrixXd A = G.transpose() * G + Eigen::MatrixXd::Identity(n, n);
  const CgResult r = cg_solve(dense_operator(A), bench::random_block(n, 1, 7), Eigen::VectorXd::Zero(n), 0.0,
                              state.range(0));
  const Tridiagonal T = build_tridiag(r.trace);
  for (auto _ : state) benchmark::DoNotOptimize(quadrature_log(T));
}
BENCHMARK(BM_QuadratureLog)->Arg(20)->Arg(100);

}  // namespace

#include <benchmark/benchmark.h>

#include "mixdens/kernels.hpp"
#include "mixdens/likelihood.hpp"
#include "mixdens/simulate.hpp"

using namespace mixdens;

static void BM_BuildKernelMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SimData sim = generate({Scenario::Gaussian, n, 1});
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 100);
  for (auto _ : state) {
    const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
    benchmark::DoNotOptimize(F.values().data());
  }
  state.SetItemsProcessed(state.iterations() * n * 100);
}
BENCHMARK(BM_BuildKernelMatrix)->Arg(1000)->Arg(4000);

static void BM_MixtureNll(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SimData sim = generate({Scenario::Gaussian, n, 1});
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 100);
  const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
  const MixingPMF uniform = MixingPMF::uniform(grid);
  for (auto _ : state) benchmark::DoNotOptimize(mixture_nll(F, uniform));
  state.SetItemsProcessed(state.iterations() * n * 100);
}
BENCHMARK(BM_MixtureNll)->Arg(1000)->Arg(4000);

static void BM_Softmax(benchmark::State& state) {
  Eigen::VectorXd x(state.range(0));
  for (int j = 0; j < x.size(); ++j) x[j] = std::sin(0.37 * j) * 30.0;
  for (auto _ : state) benchmark::DoNotOptimize(softmax(x).sum());
}
BENCHMARK(BM_Softmax)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "mixdens/baselines.hpp"
#include "mixdens/simulate.hpp"

using namespace mixdens;

static void BM_NpmleEm(benchmark::State& state) {
  const SimData sim = generate({Scenario::PointMass, static_cast<int>(state.range(0)), 2});
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 100);
  const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
  for (auto _ : state) {
    const NpmleResult r = npmle_em(F, grid, {static_cast<long>(state.range(1)), 0.0});
    benchmark::DoNotOptimize(r.pmf.weights().sum());
  }
}
BENCHMARK(BM_NpmleEm)->Args({1000, 100})->Args({4000, 100});

static void BM_EfronFit(benchmark::State& state) {
  const SimData sim = generate({Scenario::Gaussian, static_cast<int>(state.range(0)), 2});
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 100);
  const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
  const SplineBasis basis = spline_basis(grid, 5);
  for (auto _ : state) {
    const EfronResult r = efron_fit(F, grid, basis, 1.0, {200, 1e-6});
    benchmark::DoNotOptimize(r.pmf.weights().sum());
  }
}
BENCHMARK(BM_EfronFit)->Arg(1000);

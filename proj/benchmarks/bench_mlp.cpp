#include <benchmark/benchmark.h>

#include "mixdens/mlp.hpp"
#include "mixdens/simulate.hpp"

using namespace mixdens;

namespace {

struct Setup {
  Grid grid;
  KernelMatrix F;
  MlpModel model;

  static Setup make(int n, int m, int layers, int width) {
    const SimData sim = generate({Scenario::Gaussian, n, 3});
    const std::vector<double> y = sim.y_column();
    Grid grid = default_grid(y, m);
    KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
    MlpModel model = init_model({1, layers, width, m}, 5);
    return {std::move(grid), std::move(F), std::move(model)};
  }
};

}  // namespace

static void BM_ForwardPmf(benchmark::State& state) {
  const Setup s = Setup::make(400, 100, static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_pmf(s.model, s.grid).weights().sum());
}
BENCHMARK(BM_ForwardPmf)->Args({4, 500})->Args({1, 500})->Args({2, 64});

static void BM_LossAndGradient(benchmark::State& state) {
  const Setup s = Setup::make(400, 100, static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto [loss, grad] = loss_and_gradient(s.model, s.F, s.grid);
    benchmark::DoNotOptimize(loss);
    benchmark::DoNotOptimize(grad.weights.back().data());
  }
}
BENCHMARK(BM_LossAndGradient)->Args({4, 500})->Args({1, 500})->Args({2, 64});

#include <doctest.h>

#include <cmath>
#include <limits>

#include "mixdens/baselines.hpp"
#include "mixdens/errors.hpp"
#include "mixdens/likelihood.hpp"
#include "mixdens/optimizer.hpp"
#include "mixdens/simulate.hpp"
#include "test_helpers.hpp"

using namespace mixdens;

TEST_SUITE_BEGIN("optimizer");

namespace {

GradientSet constant_like(const MlpModel& model, double v) {
  GradientSet g = GradientSet::zeros_like(model);
  for (auto& w : g.weights) w.setConstant(v);
  for (auto& b : g.biases) b.setConstant(v);
  return g;
}

double max_param_gap(const MlpModel& a, const MlpModel& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    worst = std::max(worst, (a.weights[k] - b.weights[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.biases[k] - b.biases[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("step size schedule") {
  TrainConfig cfg;
  CHECK(step_size(1, cfg) == doctest::Approx(0.0003).epsilon(1e-15));
  CHECK(step_size(32, cfg) == doctest::Approx(0.00015).epsilon(1e-12));
  for (long t = 1; t < 500; ++t) CHECK(step_size(t + 1, cfg) < step_size(t, cfg));
}

TEST_CASE("epoch batches partition the data") {
  Rng rng(5);
  const auto batches = epoch_batches(10, 3, rng);
  REQUIRE(batches.size() == 4);
  CHECK(batches[0].size() == 3);
  CHECK(batches[1].size() == 3);
  CHECK(batches[2].size() == 3);
  CHECK(batches[3].size() == 1);
  std::vector<int> seen(10, 0);
  for (const auto& b : batches)
    for (int i : b) seen[static_cast<std::size_t>(i)] += 1;
  for (int c : seen) CHECK(c == 1);

  Rng rng_a(9), rng_b(9);
  CHECK(epoch_batches(17, 4, rng_a) == epoch_batches(17, 4, rng_b));

  Rng rng_c(3);
  const auto single = epoch_batches(6, 6, rng_c);
  REQUIRE(single.size() == 1);
  CHECK(single[0].size() == 6);
}

TEST_CASE("stopping rule") {
  TrainConfig cfg;  // tol 0.01, lag 10
  std::vector<double> flat(11, 1.23);
  CHECK(should_stop(flat, 11, cfg));

  std::vector<double> falling;
  for (int t = 1; t <= 30; ++t) falling.push_back(100.0 - t);
  CHECK_FALSE(should_stop(falling, 30, cfg));

  std::vector<double> ten(10, 0.5);
  CHECK_FALSE(should_stop(ten, 10, cfg));  // t == lag never fires
}

TEST_CASE("weight one reduces the update to plain SGD") {
  TrainConfig cfg;
  cfg.weight = 1.0;
  cfg.base_step = 0.05;
  cfg.step_decay = 0.0;

  MlpModel model = init_model({1, 1, 2, 3}, 1);
  const MlpModel before = model;
  TrainState state;
  state.t = 6;  // pretend history exists
  state.hist_count = 4;
  state.hist_sum = constant_like(model, 100.0);

  const GradientSet g = constant_like(model, 2.0);
  wag_step(model, state, g, cfg);

  MlpModel expected = before;
  for (auto& w : expected.weights) w.array() -= 0.05 * 2.0;
  for (auto& b : expected.biases) b.array() -= 0.05 * 2.0;
  CHECK(max_param_gap(model, expected) == 0.0);
}

TEST_CASE("hand-worked blend at t = 3") {
  TrainConfig cfg;
  cfg.weight = 0.6;
  cfg.base_step = 1.0;
  cfg.step_decay = 0.0;

  MlpModel model = init_model({1, 1, 1, 1}, 2);
  const MlpModel before = model;
  TrainState state;
  state.t = 2;
  state.hist_count = 1;
  state.hist_sum = constant_like(model, 2.0);
  state.pending = constant_like(model, 7.0);

  wag_step(model, state, constant_like(model, 1.0), cfg);

  // 0.6 * 1 + 0.4 * 2 = 1.4 on every coordinate.
  MlpModel expected = before;
  for (auto& w : expected.weights) w.array() -= 1.4;
  for (auto& b : expected.biases) b.array() -= 1.4;
  CHECK(max_param_gap(model, expected) < 1e-15);
  CHECK(state.t == 3);
  // The pending gradient joined the history; the new one replaced it.
  CHECK(state.hist_count == 2);
  CHECK(state.hist_sum->weights[0](0, 0) == doctest::Approx(9.0));
  CHECK(state.pending->weights[0](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("zero gradient and zero history is a fixed point") {
  TrainConfig cfg;
  MlpModel model = init_model({1, 1, 3, 4}, 11);
  const MlpModel before = model;
  TrainState state;
  wag_step(model, state, GradientSet::zeros_like(model), cfg);
  wag_step(model, state, GradientSet::zeros_like(model), cfg);
  wag_step(model, state, GradientSet::zeros_like(model), cfg);
  CHECK(max_param_gap(model, before) == 0.0);
}

TEST_CASE("nonfinite gradients abort") {
  TrainConfig cfg;
  MlpModel model = init_model({1, 1, 2, 2}, 1);
  TrainState state;
  GradientSet g = GradientSet::zeros_like(model);
  g.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(wag_step(model, state, g, cfg), numeric_error);
}

TEST_CASE("state replays the averaged-gradient recursion exactly") {
  TrainConfig cfg;
  cfg.weight = 0.6;
  cfg.base_step = 0.01;
  cfg.step_decay = 0.2;

  const MlpArchitecture arch{1, 1, 2, 3};
  MlpModel live = init_model(arch, 21);
  MlpModel replay = live;
  TrainState state;

  Rng rng(77);
  std::vector<GradientSet> history;
  for (long t = 1; t <= 40; ++t) {
    GradientSet g = GradientSet::zeros_like(live);
    for (auto& w : g.weights)
      for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.normal();
    for (auto& b : g.biases)
      for (int i = 0; i < b.size(); ++i) b[i] = rng.normal();
    history.push_back(g);

    wag_step(live, state, g, cfg);

    // Naive replay of the update straight from its definition.
    const double eta = cfg.base_step * std::pow(static_cast<double>(t), -0.2);
    GradientSet dir = GradientSet::zeros_like(replay);
    if (t <= 2) {
      dir.axpy(1.0, g);
    } else {
      dir.axpy(cfg.weight, g);
      GradientSet mean = GradientSet::zeros_like(replay);
      for (long k = 0; k < t - 2; ++k) mean.axpy(1.0, history[static_cast<std::size_t>(k)]);
      mean.scale(1.0 / static_cast<double>(t - 2));
      dir.axpy(1.0 - cfg.weight, mean);
    }
    for (std::size_t k = 0; k < replay.weights.size(); ++k) {
      replay.weights[k] -= eta * dir.weights[k];
      replay.biases[k] -= eta * dir.biases[k];
    }
    CHECK(max_param_gap(live, replay) < 1e-12);
  }

  // After iteration T the queue has folded gradients 1..T-1; the running
  // mean equals their arithmetic mean with no drift.
  REQUIRE(state.hist_count == 39);
  GradientSet mean = GradientSet::zeros_like(live);
  for (long k = 0; k < 39; ++k) mean.axpy(1.0, history[static_cast<std::size_t>(k)]);
  mean.scale(1.0 / 39.0);
  for (std::size_t k = 0; k < mean.weights.size(); ++k) {
    const Eigen::MatrixXd got = state.hist_sum->weights[k] / 39.0;
    CHECK((got - mean.weights[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("w = 1 full-batch training is plain gradient descent") {
  const ScenarioSpec scen{Scenario::Gaussian, 40, 99};
  const SimData sim = generate(scen);
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 12);
  const MlpArchitecture arch{1, 1, 8, 12};

  TrainConfig cfg;
  cfg.weight = 1.0;
  cfg.batch_size = 40;
  cfg.max_epochs = 25;
  cfg.base_step = 0.01;
  cfg.step_decay = 0.0;
  cfg.stop_tol = 1e-300;  // never fires
  cfg.seed = 7;

  const TrainResult trained = train_neural_g(y, sim.kernel, grid, arch, cfg);

  // Independent loop: same batch order (a permutation of everything), plain
  // phi -= eta * grad updates through the public gradient op.
  const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
  MlpModel model = init_model(arch, cfg.seed);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5f5f5f5fULL));
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto batches = epoch_batches(40, 40, shuffle_rng);
    REQUIRE(batches.size() == 1);
    Eigen::MatrixXd rows(40, grid.size());
    for (int i = 0; i < 40; ++i)
      rows.row(i) = F.values().row(batches[0][static_cast<std::size_t>(i)]);
    const auto [loss, grad] = loss_and_gradient(model, KernelMatrix(rows), grid);
    (void)loss;
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
      model.weights[k] -= cfg.base_step * grad.weights[k];
      model.biases[k] -= cfg.base_step * grad.biases[k];
    }
  }
  CHECK(max_param_gap(trained.model, model) == 0.0);
}

TEST_CASE("training is deterministic given the seed") {
  const SimData sim = generate({Scenario::Uniform, 60, 5});
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 10);
  const MlpArchitecture arch{1, 1, 6, 10};
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.seed = 3;

  const TrainResult a = train_neural_g(y, sim.kernel, grid, arch, cfg);
  const TrainResult b = train_neural_g(y, sim.kernel, grid, arch, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].iteration == b.trace[i].iteration);
    CHECK(a.trace[i].full_loss == b.trace[i].full_loss);
  }
  CHECK((a.pmf.weights().array() == b.pmf.weights().array()).all());
}

TEST_CASE("one-epoch budget is respected") {
  const SimData sim = generate({Scenario::Gaussian, 20, 8});
  const std::vector<double> y = sim.y_column();
  const Grid grid = default_grid(y, 8);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.batch_size = 20;
  cfg.stop_tol = 1e6;
  cfg.seed = 2;

  const TrainResult r = train_neural_g(y, sim.kernel, grid, {1, 1, 4, 8}, cfg);
  CHECK(r.trace.size() == 1);  // B = 1 iteration in the single epoch
  CHECK_FALSE(r.stopped_early);  // budget hit before the lag window filled
}

TEST_CASE("a point mass is recovered at desk scale") {
  // Single atom at zero with sigma 0.5 noise; the fitted prior should pile
  // its mass onto the support cells bracketing zero, like the EM solution.
  Rng rng(31);
  std::vector<double> y(50);
  for (auto& v : y) v = rng.normal(0.0, 0.5);
  const KernelSpec kernel = KernelSpec::normal_location(0.5);
  const Grid grid = default_grid(y, 15);

  TrainConfig cfg;
  cfg.seed = 4;
  cfg.max_epochs = 4000;
  cfg.stop_tol = 1e-5;
  const TrainResult fit = train_neural_g(y, kernel, grid, {1, 2, 16, 15}, cfg);

  const double spacing = grid.at(1) - grid.at(0);
  double near_zero = 0.0;
  for (int j = 0; j < grid.size(); ++j)
    if (std::abs(grid.at(j)) <= 1.5 * spacing) near_zero += fit.pmf.weights()[j];
  CHECK(near_zero >= 0.95);

  const NpmleResult oracle = npmle_em(build_kernel_matrix(kernel, y, grid), grid);
  double oracle_near_zero = 0.0;
  for (int j = 0; j < grid.size(); ++j)
    if (std::abs(grid.at(j)) <= 1.5 * spacing) oracle_near_zero += oracle.pmf.weights()[j];
  CHECK(oracle_near_zero >= 0.95);
}

TEST_CASE("terminated runs improve on the uniform starting loss") {
  for (const Scenario s : {Scenario::Uniform, Scenario::Piecewise, Scenario::Gumbel,
                           Scenario::Bounded, Scenario::PointMass, Scenario::Gaussian}) {
    const SimData sim = generate({s, 500, 12});
    const std::vector<double> y = sim.y_column();
    const Grid grid = default_grid(y, 40);
    TrainConfig cfg;
    cfg.seed = 13;
    cfg.max_epochs = 300;
    const TrainResult fit = train_neural_g(y, sim.kernel, grid, {1, 2, 32, 40}, cfg);

    const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
    const double at_uniform = mixture_nll(F, MixingPMF::uniform(grid));
    REQUIRE_FALSE(fit.trace.empty());
    CHECK(fit.trace.back().full_loss <= at_uniform);
    // Termination came from the stopping rule or the epoch budget.
    CHECK((fit.stopped_early || fit.trace.back().epoch == 300));
  }
}

TEST_SUITE_END();

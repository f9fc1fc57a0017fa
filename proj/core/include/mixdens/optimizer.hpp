#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"
#include "mixdens/mlp.hpp"
#include "mixdens/rng.hpp"

namespace mixdens {

struct TrainConfig {
  int batch_size = 0;    // 0 -> ceil(n/10) capped at 512
  int max_epochs = 8000;
  double weight = 0.6;   // blend between current and averaged past gradients
  double base_step = 3e-4;
  double step_decay = 0.2;
  double stop_tol = 0.01;
  int stop_lag = 10;
  std::uint64_t seed = 0;
  /// Evaluate the full-data loss every k-th iteration. 1 checks the stopping
  /// rule after every update; larger values thin the check for big n.
  int loss_eval_stride = 1;

  void validate() const;
  int resolve_batch_size(int n) const;
};

/// eta * t^(-decay).
double step_size(long t, const TrainConfig& cfg);

/// A seeded permutation of 0..n-1 cut into ceil(n/S) consecutive batches;
/// all full size except possibly the last.
std::vector<std::vector<int>> epoch_batches(int n, int batch_size, Rng& rng);

/// True once t > lag and |loss(t) - loss(t - lag)| < tol. `losses[k]` holds
/// the full-data loss recorded at the (k+1)-th evaluation.
bool should_stop(std::span<const double> losses, long t, const TrainConfig& cfg);

/// Optimizer bookkeeping for one training run.
///
/// The history average at iteration t covers the gradients computed at
/// iterations 1..t-2, so each gradient sits in `pending` for one iteration
/// before joining `hist_sum`. Sums are kept raw and divided on use; the
/// running mean is therefore exactly the arithmetic mean of the stored
/// gradients in arrival order.
struct TrainState {
  long t = 0;
  long hist_count = 0;
  std::optional<GradientSet> hist_sum;
  std::optional<GradientSet> pending;
  std::vector<double> losses;  // full-data loss per evaluation
};

/// One weighted-average-gradient update:
///   phi <- phi - eta(t) * (w * g + (1 - w) * mean(past gradients)).
/// Iterations 1 and 2 take the plain step -eta(t) * g since the history
/// window 1..t-2 is still empty. Advances state.t and queues g so it enters
/// the history exactly one iteration later.
void wag_step(MlpModel& model, TrainState& state, const GradientSet& g_current,
              const TrainConfig& cfg);

struct TraceEntry {
  long iteration;
  int epoch;
  double full_loss;
};

struct TrainResult {
  MixingPMF pmf;
  MlpModel model;
  std::vector<TraceEntry> trace;
  bool stopped_early;
};

/// The full training loop: precompute the kernel matrix once, run epochs of
/// WAG steps over shuffled minibatches, evaluate the full-data loss after
/// each update, and stop on the lag rule or the epoch budget.
TrainResult train_neural_g(std::span<const double> data, const KernelSpec& spec,
                           const Grid& grid, const MlpArchitecture& arch,
                           const TrainConfig& cfg);

/// Same loop over an already-built kernel matrix and explicit network inputs
/// (one column per support point). The multivariate fit standardizes its
/// inputs before calling this.
TrainResult train_core(const KernelMatrix& F, const Eigen::MatrixXd& inputs,
                       const Grid& grid, const MlpArchitecture& arch,
                       const TrainConfig& cfg);

}  // namespace mixdens

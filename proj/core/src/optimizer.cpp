#include "mixdens/optimizer.hpp"

#include <cmath>
#include <string>

#include "mixdens/errors.hpp"
#include "mixdens/likelihood.hpp"

namespace mixdens {

void TrainConfig::validate() const {
  if (batch_size < 0) throw input_error("TrainConfig: batch_size must be >= 0");
  if (max_epochs < 1) throw input_error("TrainConfig: max_epochs must be >= 1");
  if (weight < 0.0 || weight > 1.0)
    throw input_error("TrainConfig: weight must lie in [0, 1]");
  if (!(base_step > 0.0)) throw input_error("TrainConfig: base_step must be positive");
  if (!(stop_tol > 0.0)) throw input_error("TrainConfig: stop_tol must be positive");
  if (stop_lag < 1) throw input_error("TrainConfig: stop_lag must be >= 1");
  if (loss_eval_stride < 1)
    throw input_error("TrainConfig: loss_eval_stride must be >= 1");
}

int TrainConfig::resolve_batch_size(int n) const {
  if (batch_size > 0) return std::min(batch_size, n);
  const int derived = (n + 9) / 10;
  return std::min(std::min(derived, 512), n);
}

double step_size(long t, const TrainConfig& cfg) {
  if (t < 1) throw input_error("step_size: t starts at 1");
  return cfg.base_step * std::pow(static_cast<double>(t), -cfg.step_decay);
}

std::vector<std::vector<int>> epoch_batches(int n, int batch_size, Rng& rng) {
  if (n < 1 || batch_size < 1)
    throw input_error("epoch_batches: n and batch_size must be positive");
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng.shuffle(perm);

  const int b = (n + batch_size - 1) / batch_size;
  std::vector<std::vector<int>> batches;
  batches.reserve(static_cast<std::size_t>(b));
  for (int k = 0; k < b; ++k) {
    const int lo = k * batch_size;
    const int hi = std::min(n, lo + batch_size);
    batches.emplace_back(perm.begin() + lo, perm.begin() + hi);
  }
  return batches;
}

bool should_stop(std::span<const double> losses, long t, const TrainConfig& cfg) {
  if (t <= cfg.stop_lag) return false;
  const auto now = static_cast<std::size_t>(t - 1);
  const auto then = static_cast<std::size_t>(t - 1 - cfg.stop_lag);
  if (now >= losses.size()) throw input_error("should_stop: loss history too short");
  return std::abs(losses[now] - losses[then]) < cfg.stop_tol;
}

void wag_step(MlpModel& model, TrainState& state, const GradientSet& g_current,
              const TrainConfig& cfg) {
  if (!g_current.all_finite())
    throw numeric_error("wag_step: nonfinite gradient at iteration " +
                        std::to_string(state.t + 1));
  state.t += 1;
  const double eta = step_size(state.t, cfg);

  if (state.t <= 2 || state.hist_count == 0) {
    for (std::size_t k = 0; k < model.weights.size(); ++k)
      model.weights[k] -= eta * g_current.weights[k];
    for (std::size_t k = 0; k < model.biases.size(); ++k)
      model.biases[k] -= eta * g_current.biases[k];
  } else {
    const double w = cfg.weight;
    const double hist_scale = (1.0 - w) / static_cast<double>(state.hist_count);
    for (std::size_t k = 0; k < model.weights.size(); ++k)
      model.weights[k] -= eta * (w * g_current.weights[k] +
                                 hist_scale * state.hist_sum->weights[k]);
    for (std::size_t k = 0; k < model.biases.size(); ++k)
      model.biases[k] -= eta * (w * g_current.biases[k] +
                                hist_scale * state.hist_sum->biases[k]);
  }

  // The gradient from iteration t-1 joins the history now, so the average
  // used at iteration t+1 spans exactly iterations 1..t-1.
  if (state.pending) {
    if (!state.hist_sum) {
      state.hist_sum = std::move(*state.pending);
    } else {
      state.hist_sum->axpy(1.0, *state.pending);
    }
    state.hist_count += 1;
  }
  state.pending = g_current;
}

TrainResult train_core(const KernelMatrix& F, const Eigen::MatrixXd& inputs,
                       const Grid& grid, const MlpArchitecture& arch,
                       const TrainConfig& cfg) {
  cfg.validate();
  arch.validate();
  if (arch.output_dim != grid.size())
    throw input_error("train_core: output dimension must equal grid size");
  if (F.cols() != grid.size())
    throw input_error("train_core: kernel matrix does not match grid");

  const int n = F.rows();
  const int batch = cfg.resolve_batch_size(n);

  MlpModel model = init_model(arch, cfg.seed);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5f5f5f5fULL));

  TrainState state;
  std::vector<TraceEntry> trace;

  ForwardCache cache = forward_network(model, inputs);
  bool stopped = false;

  for (int epoch = 1; epoch <= cfg.max_epochs && !stopped; ++epoch) {
    const auto batches = epoch_batches(n, batch, shuffle_rng);
    for (const auto& rows : batches) {
      const MixtureBatchGrad mbg = mixture_batch_grad(F.values(), rows, cache.pmf);
      const Eigen::VectorXd dlogits = softmax_backward(cache.pmf, mbg.dpmf);
      GradientSet grad = backward_network(model, cache, inputs, dlogits);

      wag_step(model, state, grad, cfg);
      cache = forward_network(model, inputs);

      if (state.t % cfg.loss_eval_stride == 0) {
        const double full_loss = mixture_nll(F.values(), cache.pmf);
        state.losses.push_back(full_loss);
        trace.push_back({state.t, epoch, full_loss});
        if (cfg.loss_eval_stride == 1) {
          stopped = should_stop(state.losses, state.t, cfg);
        } else if (static_cast<long>(state.losses.size()) > cfg.stop_lag) {
          const std::size_t now = state.losses.size() - 1;
          stopped = std::abs(state.losses[now] -
                             state.losses[now - static_cast<std::size_t>(cfg.stop_lag)]) <
                    cfg.stop_tol;
        }
        if (stopped) break;
      }
    }
  }

  return TrainResult{MixingPMF(grid, cache.pmf), std::move(model),
                     std::move(trace), stopped};
}

TrainResult train_neural_g(std::span<const double> data, const KernelSpec& spec,
                           const Grid& grid, const MlpArchitecture& arch,
                           const TrainConfig& cfg) {
  if (data.empty()) throw input_error("train_neural_g: empty data");
  const KernelMatrix F = build_kernel_matrix(spec, data, grid);
  return train_core(F, grid.points().transpose(), grid, arch, cfg);
}

}  // namespace mixdens

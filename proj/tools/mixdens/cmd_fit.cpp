#include <chrono>
#include <memory>

#include "cli_common.hpp"
#include "commands.hpp"
#include "mixdens/csv.hpp"
#include "mixdens/errors.hpp"
#include "mixdens/multivariate.hpp"

namespace mixdens::cli {

namespace {

struct FitArgs {
  std::string data;
  EstimatorArgs est;
  SeedArg seed;
  std::string out;
  std::string trace;
  std::string model;
  std::string config;
};

void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.size());
  for (const auto& t : trace)
    rows.push_back({static_cast<double>(t.iteration), static_cast<double>(t.epoch),
                    t.full_loss});
  write_csv(path, {"iteration", "epoch", "full_loss"}, rows);
}

void run(const FitArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  FitArgs merged = args;
  merge_flag(cmd, config, "--data", "data", merged.data);
  merge_flag(cmd, config, "--out", "out", merged.out);
  merge_flag(cmd, config, "--trace", "trace", merged.trace);
  merge_flag(cmd, config, "--model", "model", merged.model);
  merge_estimator_args(cmd, config, merged.est);
  const std::uint64_t seed = merged.seed.resolve(cmd, config);

  if (merged.data.empty()) throw input_error("fit: --data is required");
  if (merged.out.empty()) throw input_error("fit: --out is required");

  const auto started = std::chrono::steady_clock::now();
  bool bivariate = false;
  const Eigen::MatrixXd responses = read_response_csv(merged.data, bivariate);

  FitOutcome outcome = [&]() -> FitOutcome {
    if (!bivariate) {
      std::vector<double> y(static_cast<std::size_t>(responses.rows()));
      for (int i = 0; i < responses.rows(); ++i) y[static_cast<std::size_t>(i)] = responses(i, 0);
      return run_estimator(merged.est, merged.est.kernel_spec(), y,
                           merged.est.make_grid(y), seed);
    }
    // Paired responses: representative-point support, location-scale kernel.
    const GridSelection sel =
        select_grid_bivariate(responses, merged.est.grid_size, derive_seed(seed, 1));
    if (merged.est.estimator == "neuralg") {
      const TrainResult fit = fit_multivariate_neural_g(
          responses, sel.grid, merged.est.architecture(sel.grid.size(), 2),
          merged.est.train_config(seed));
      nlohmann::json model = nlohmann::json::parse(model_to_json(fit.model));
      model["estimator"] = "neuralg";
      model["stopped_early"] = fit.stopped_early;
      return {fit.pmf, "neuralg", fit.trace, std::move(model)};
    }
    if (merged.est.estimator == "npmle") {
      const KernelMatrix F =
          build_kernel_matrix(KernelSpec::normal_location_scale(), responses, sel.grid);
      const NpmleResult fit = npmle_em(F, sel.grid, merged.est.npmle_options());
      std::vector<TraceEntry> trace;
      for (std::size_t k = 0; k < fit.nll_trace.size(); ++k)
        trace.push_back({static_cast<long>(k), static_cast<int>(k), fit.nll_trace[k]});
      nlohmann::json model{{"estimator", "npmle"}, {"converged", fit.converged}};
      return {fit.pmf, "npmle", std::move(trace), std::move(model)};
    }
    throw input_error("paired data supports --estimator neuralg or npmle");
  }();

  write_density_csv(merged.out, outcome.pmf);
  if (!merged.trace.empty()) write_trace_csv(merged.trace, outcome.trace);
  if (!merged.model.empty()) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    outcome.model["n"] = responses.rows();
    outcome.model["m"] = outcome.pmf.size();
    outcome.model["seed"] = seed;
    outcome.model["elapsed_seconds"] = elapsed;
    write_text(merged.model, outcome.model.dump(2));
  }
}

}  // namespace

void register_fit(CLI::App& app) {
  auto args = std::make_shared<FitArgs>();
  CLI::App* cmd = app.add_subcommand("fit", "estimate a mixing density");
  cmd->add_option("--data", args->data, "input CSV (y, or y1,y2 for pairs)");
  args->est.register_flags(*cmd);
  args->seed.register_flag(*cmd);
  cmd->add_option("--out", args->out, "density CSV path");
  cmd->add_option("--trace", args->trace, "training trace CSV path");
  cmd->add_option("--model", args->model, "fitted model JSON path");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run(*args, *cmd); });
}

}  // namespace mixdens::cli

#include <chrono>
#include <memory>

#include "cli_common.hpp"
#include "commands.hpp"
#include "mixdens/errors.hpp"
#include "mixdens/posterior.hpp"

namespace mixdens::cli {

namespace {

struct EvaluateArgs {
  std::string density;
  std::string scenario;
  std::string truth_spec;
  std::string data;
  std::string estimator_label;
  EstimatorArgs est;  // kernel flags for the MAE path
  SeedArg seed;
  std::string out;
  std::string config;
};

void run(const EvaluateArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  EvaluateArgs merged = args;
  merge_flag(cmd, config, "--density", "density", merged.density);
  merge_flag(cmd, config, "--scenario", "scenario", merged.scenario);
  merge_flag(cmd, config, "--truth-spec", "truth_spec", merged.truth_spec);
  merge_flag(cmd, config, "--data", "data", merged.data);
  merge_flag(cmd, config, "--estimator-label", "estimator_label", merged.estimator_label);
  merge_flag(cmd, config, "--out", "out", merged.out);
  merge_estimator_args(cmd, config, merged.est);
  const std::uint64_t seed = merged.seed.resolve(cmd, config);

  if (merged.density.empty()) throw input_error("evaluate: --density is required");
  if (merged.scenario.empty() && merged.truth_spec.empty())
    throw input_error("evaluate: a truth is required (--scenario or --truth-spec)");

  const auto started = std::chrono::steady_clock::now();
  const MixingPMF est = read_density_csv(merged.density);
  if (est.grid().dim() != 1)
    throw input_error("evaluate: univariate densities only");

  KernelSpec kernel = merged.est.kernel_spec();
  TruePrior truth = merged.truth_spec.empty()
                        ? truth_from_scenario(merged.scenario)
                        : truth_from_spec_file(merged.truth_spec);
  if (!merged.scenario.empty() && merged.truth_spec.empty() &&
      cmd.count("--kernel") == 0 && cmd.count("--sigma") == 0) {
    // Scenario names imply their generating kernel.
    kernel = generate({scenario_from_name(merged.scenario), 1, 1}).kernel;
  }

  MetricsReport report;
  const W1Result w1 = w1_distance(est, truth);
  report.w1 = w1.value;
  report.w1_cell_width = w1.cell_width;
  report.m = est.size();
  report.seed = seed;
  report.estimator = merged.estimator_label;

  if (!merged.data.empty()) {
    const std::vector<double> y = read_univariate_csv(merged.data);
    report.n = static_cast<long>(y.size());
    const KernelMatrix F = build_kernel_matrix(kernel, y, est.grid());
    const Eigen::MatrixXd means = posterior_mean(posterior_pmf(F, est));
    std::vector<double> est_means(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      est_means[i] = means(static_cast<int>(i), 0);
    report.mae = bayes_mae(est_means, true_posterior_means(truth, kernel, y));
  }

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const std::string text = metrics_to_json(report);
  if (merged.out.empty())
    std::fputs((text + "\n").c_str(), stdout);
  else
    write_text(merged.out, text);
}

}  // namespace

void register_evaluate(CLI::App& app) {
  auto args = std::make_shared<EvaluateArgs>();
  CLI::App* cmd = app.add_subcommand("evaluate", "score a fitted density against a truth");
  cmd->add_option("--density", args->density, "estimated prior CSV");
  cmd->add_option("--scenario", args->scenario, "scenario supplying the truth");
  cmd->add_option("--truth-spec", args->truth_spec, "truth description JSON");
  cmd->add_option("--data", args->data, "observations CSV (enables MAE)");
  cmd->add_option("--estimator-label", args->estimator_label, "label echoed in the report");
  args->est.register_flags(*cmd, /*with_estimator=*/false);
  args->seed.register_flag(*cmd);
  cmd->add_option("--out", args->out, "metrics JSON path (default: stdout)");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run(*args, *cmd); });
}

}  // namespace mixdens::cli

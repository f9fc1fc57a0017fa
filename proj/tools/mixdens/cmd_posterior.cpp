#include <memory>

#include "cli_common.hpp"
#include "commands.hpp"
#include "mixdens/csv.hpp"
#include "mixdens/errors.hpp"
#include "mixdens/posterior.hpp"

namespace mixdens::cli {

namespace {

struct PosteriorArgs {
  std::string data;
  std::string density;
  EstimatorArgs est;  // kernel flags only
  double level = 0.95;
  std::string out;
  std::string config;
};

void run(const PosteriorArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  PosteriorArgs merged = args;
  merge_flag(cmd, config, "--data", "data", merged.data);
  merge_flag(cmd, config, "--density", "density", merged.density);
  merge_flag(cmd, config, "--level", "level", merged.level);
  merge_flag(cmd, config, "--out", "out", merged.out);
  merge_estimator_args(cmd, config, merged.est);

  if (merged.data.empty()) throw input_error("posterior: --data is required");
  if (merged.density.empty()) throw input_error("posterior: --density is required");
  if (merged.out.empty()) throw input_error("posterior: --out is required");

  const std::vector<double> y = read_univariate_csv(merged.data);
  const MixingPMF prior = read_density_csv(merged.density);
  if (prior.grid().dim() != 1)
    throw input_error("posterior: univariate densities only");

  const KernelMatrix F =
      build_kernel_matrix(merged.est.kernel_spec(), y, prior.grid());
  const PosteriorPMF post = posterior_pmf(F, prior);
  const Eigen::MatrixXd means = posterior_mean(post);
  const auto intervals = credible_interval(post, merged.level);

  std::vector<std::vector<double>> rows;
  rows.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    rows.push_back({static_cast<double>(i), y[i], means(static_cast<int>(i), 0),
                    intervals[i].lo, intervals[i].hi});
  write_csv(merged.out, {"i", "y", "post_mean", "lo", "hi"}, rows);
}

}  // namespace

void register_posterior(CLI::App& app) {
  auto args = std::make_shared<PosteriorArgs>();
  CLI::App* cmd = app.add_subcommand("posterior", "per-observation posterior summaries");
  cmd->add_option("--data", args->data, "observations CSV");
  cmd->add_option("--density", args->density, "estimated prior CSV");
  args->est.register_flags(*cmd, /*with_estimator=*/false);
  cmd->add_option("--level", args->level, "credible level");
  cmd->add_option("--out", args->out, "output CSV path");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run(*args, *cmd); });
}

}  // namespace mixdens::cli

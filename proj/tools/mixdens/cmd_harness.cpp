#include <atomic>
#include <chrono>
#include <future>
#include <memory>
#include <vector>

#include "cli_common.hpp"
#include "commands.hpp"
#include "mixdens/csv.hpp"
#include "mixdens/errors.hpp"
#include "mixdens/posterior.hpp"
#include "mixdens/rng.hpp"

namespace mixdens::cli {

namespace {

/// Index-addressed replication loop; results land in caller-owned slots so
/// aggregation order never depends on scheduling.
template <typename Fn>
void parallel_reps(int reps, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (int r = 0; r < reps; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::future<void>> workers;
  const int count = std::min(jobs, reps);
  workers.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (int r = next++; r < reps; r = next++) fn(r);
    }));
  }
  for (auto& f : workers) f.get();
}

// ---------------------------------------------------------------------------
// coverage

struct CoverageArgs {
  std::string scenario;
  std::vector<int> n_list{1000};
  int reps = 20;
  EstimatorArgs est;
  SeedArg seed;
  int jobs = 1;
  std::string out;
  std::string config;
};

void run_coverage(const CoverageArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  CoverageArgs merged = args;
  merge_flag(cmd, config, "--scenario", "scenario", merged.scenario);
  merge_flag(cmd, config, "--n", "n", merged.n_list);
  merge_flag(cmd, config, "--reps", "reps", merged.reps);
  merge_flag(cmd, config, "--jobs", "jobs", merged.jobs);
  merge_flag(cmd, config, "--out", "out", merged.out);
  merge_estimator_args(cmd, config, merged.est);
  const std::uint64_t seed = merged.seed.resolve(cmd, config);

  if (merged.scenario.empty()) throw input_error("coverage: --scenario is required");
  if (merged.out.empty()) throw input_error("coverage: --out is required");
  if (merged.reps < 1) throw input_error("coverage: --reps must be positive");
  const Scenario which = scenario_from_name(merged.scenario);
  if (scenario_is_bivariate(which))
    throw input_error("coverage: univariate scenarios only");

  std::vector<std::vector<double>> table;
  for (std::size_t idx = 0; idx < merged.n_list.size(); ++idx) {
    const int n = merged.n_list[idx];
    if (n < 2) throw input_error("coverage: n must be at least 2");

    std::vector<double> ecp(static_cast<std::size_t>(merged.reps));
    std::vector<double> width(static_cast<std::size_t>(merged.reps));
    parallel_reps(merged.reps, merged.jobs, [&](int rep) {
      const std::uint64_t stream =
          derive_seed(seed, idx * 1000003ULL + static_cast<std::uint64_t>(rep));
      const SimData sim = generate({which, n, stream});
      const std::vector<double> y = sim.y_column();
      const Grid grid = merged.est.make_grid(y);

      const FitOutcome fit = run_estimator(merged.est, sim.kernel, y, grid,
                                           derive_seed(stream, 2));
      const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
      const auto intervals = credible_interval(posterior_pmf(F, fit.pmf), 0.95);

      std::vector<double> truths(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) truths[static_cast<std::size_t>(i)] = sim.theta(i, 0);
      ecp[static_cast<std::size_t>(rep)] = empirical_coverage(truths, intervals);
      double w = 0.0;
      for (const auto& iv : intervals) w += iv.hi - iv.lo;
      width[static_cast<std::size_t>(rep)] = w / static_cast<double>(n);
    });

    double ecp_mean = 0.0, width_mean = 0.0;
    for (int r = 0; r < merged.reps; ++r) {
      ecp_mean += ecp[static_cast<std::size_t>(r)];
      width_mean += width[static_cast<std::size_t>(r)];
    }
    table.push_back({static_cast<double>(n), ecp_mean / merged.reps,
                     width_mean / merged.reps});
  }
  write_csv(merged.out, {"n", "ecp_mean", "width_mean"}, table);
}

// ---------------------------------------------------------------------------
// cv

struct CvArgs {
  std::string data;
  int k = 10;
  EstimatorArgs est;
  SeedArg seed;
  std::string out;
  std::string config;
};

void run_cv(const CvArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  CvArgs merged = args;
  merge_flag(cmd, config, "--data", "data", merged.data);
  merge_flag(cmd, config, "--k", "k", merged.k);
  merge_flag(cmd, config, "--out", "out", merged.out);
  merge_estimator_args(cmd, config, merged.est);
  const std::uint64_t seed = merged.seed.resolve(cmd, config);

  if (merged.data.empty()) throw input_error("cv: --data is required");

  const auto started = std::chrono::steady_clock::now();
  const std::vector<double> y = read_univariate_csv(merged.data);
  const Grid grid = merged.est.make_grid(y);
  const KernelSpec spec = merged.est.kernel_spec();
  const FoldPlan plan =
      make_fold_plan(static_cast<int>(y.size()), merged.k, derive_seed(seed, 3));

  const EstimatorFn estimator = [&](std::span<const double> train) {
    return run_estimator(merged.est, spec, train, grid, derive_seed(seed, 4)).pmf;
  };
  const CvScores scores = cv_scores(y, spec, grid, estimator, plan);

  MetricsReport report;
  report.pll = scores.pll;
  report.chi2_mae = scores.chi2_mae;
  report.n = static_cast<long>(y.size());
  report.m = grid.size();
  report.seed = seed;
  report.estimator = merged.est.estimator;
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string text = metrics_to_json(report);
  if (merged.out.empty())
    std::fputs((text + "\n").c_str(), stdout);
  else
    write_text(merged.out, text);
}

// ---------------------------------------------------------------------------
// sensitivity

struct SensitivityArgs {
  std::string scenario;
  std::vector<int> layer_list{1, 2, 3, 4, 5};
  std::vector<int> width_list{500};
  int reps = 5;
  int n = 1000;
  EstimatorArgs est;
  SeedArg seed;
  int jobs = 1;
  std::string out;
  std::string config;
};

void run_sensitivity(const SensitivityArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  SensitivityArgs merged = args;
  merge_flag(cmd, config, "--scenario", "scenario", merged.scenario);
  merge_flag(cmd, config, "--layers-list", "layers_list", merged.layer_list);
  merge_flag(cmd, config, "--widths-list", "widths_list", merged.width_list);
  merge_flag(cmd, config, "--reps", "reps", merged.reps);
  merge_flag(cmd, config, "--n", "n", merged.n);
  merge_flag(cmd, config, "--jobs", "jobs", merged.jobs);
  merge_flag(cmd, config, "--out", "out", merged.out);
  merge_estimator_args(cmd, config, merged.est);
  const std::uint64_t seed = merged.seed.resolve(cmd, config);

  if (merged.scenario.empty()) throw input_error("sensitivity: --scenario is required");
  if (merged.out.empty()) throw input_error("sensitivity: --out is required");
  if (merged.reps < 1) throw input_error("sensitivity: --reps must be positive");
  const Scenario which = scenario_from_name(merged.scenario);
  if (scenario_is_bivariate(which))
    throw input_error("sensitivity: univariate scenarios only");

  std::vector<std::vector<double>> table;
  for (const int layers : merged.layer_list) {
    for (const int width : merged.width_list) {
      std::vector<double> w1(static_cast<std::size_t>(merged.reps));
      std::vector<double> mae(static_cast<std::size_t>(merged.reps));

      parallel_reps(merged.reps, merged.jobs, [&](int rep) {
        // Replication r reuses the same dataset across (layers, width)
        // combinations, so rows compare architectures on equal footing.
        const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(rep));
        const SimData sim = generate({which, merged.n, stream});
        const std::vector<double> y = sim.y_column();
        const Grid grid = merged.est.make_grid(y);

        EstimatorArgs local = merged.est;
        local.estimator = "neuralg";
        local.layers = layers;
        local.width = width;
        const FitOutcome fit =
            run_estimator(local, sim.kernel, y, grid, derive_seed(stream, 2));

        w1[static_cast<std::size_t>(rep)] = w1_distance(fit.pmf, *sim.truth).value;
        const KernelMatrix F = build_kernel_matrix(sim.kernel, y, grid);
        const Eigen::MatrixXd means = posterior_mean(posterior_pmf(F, fit.pmf));
        std::vector<double> est_means(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
          est_means[i] = means(static_cast<int>(i), 0);
        mae[static_cast<std::size_t>(rep)] =
            bayes_mae(est_means, true_posterior_means(*sim.truth, sim.kernel, y));
      });

      double w1_mean = 0.0, mae_mean = 0.0;
      for (int r = 0; r < merged.reps; ++r) {
        w1_mean += w1[static_cast<std::size_t>(r)];
        mae_mean += mae[static_cast<std::size_t>(r)];
      }
      table.push_back({static_cast<double>(layers), static_cast<double>(width),
                       w1_mean / merged.reps, mae_mean / merged.reps});
    }
  }
  write_csv(merged.out, {"L", "h", "w1_mean", "mae_mean"}, table);
}

}  // namespace

void register_coverage(CLI::App& app) {
  auto args = std::make_shared<CoverageArgs>();
  CLI::App* cmd = app.add_subcommand("coverage", "credible-interval coverage sweep");
  cmd->add_option("--scenario", args->scenario, "generator name");
  cmd->add_option("--n", args->n_list, "sample sizes to sweep");
  cmd->add_option("--reps", args->reps, "replications per sample size");
  args->est.register_flags(*cmd);
  args->seed.register_flag(*cmd);
  cmd->add_option("--jobs", args->jobs, "parallel replications");
  cmd->add_option("--out", args->out, "coverage table CSV");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run_coverage(*args, *cmd); });
}

void register_cv(CLI::App& app) {
  auto args = std::make_shared<CvArgs>();
  CLI::App* cmd = app.add_subcommand("cv", "K-fold predictive scoring");
  cmd->add_option("--data", args->data, "input CSV");
  cmd->add_option("--k", args->k, "number of folds");
  args->est.register_flags(*cmd);
  args->seed.register_flag(*cmd);
  cmd->add_option("--out", args->out, "metrics JSON path (default: stdout)");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run_cv(*args, *cmd); });
}

void register_sensitivity(CLI::App& app) {
  auto args = std::make_shared<SensitivityArgs>();
  CLI::App* cmd = app.add_subcommand("sensitivity", "architecture sweep");
  cmd->add_option("--scenario", args->scenario, "generator name");
  cmd->add_option("--layers-list", args->layer_list, "hidden layer counts");
  cmd->add_option("--widths-list", args->width_list, "hidden widths");
  cmd->add_option("--reps", args->reps, "replications per combination");
  cmd->add_option("--n", args->n, "sample size");
  args->est.register_flags(*cmd);
  args->seed.register_flag(*cmd);
  cmd->add_option("--jobs", args->jobs, "parallel replications");
  cmd->add_option("--out", args->out, "sweep table CSV");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run_sensitivity(*args, *cmd); });
}

}  // namespace mixdens::cli

#include <memory>

#include "cli_common.hpp"
#include "commands.hpp"
#include "mixdens/csv.hpp"
#include "mixdens/errors.hpp"
#include "mixdens/simulate.hpp"

namespace mixdens::cli {

namespace {

struct SimulateArgs {
  std::string scenario;
  int n = 100;
  SeedArg seed;
  std::string out;
  bool with_truth = false;
  std::string config;
};

void run(const SimulateArgs& args, const CLI::App& cmd) {
  const nlohmann::json config = load_config(args.config);
  std::string scenario = args.scenario;
  int n = args.n;
  bool with_truth = args.with_truth;
  std::string out = args.out;
  merge_flag(cmd, config, "--scenario", "scenario", scenario);
  merge_flag(cmd, config, "--n", "n", n);
  merge_flag(cmd, config, "--with-truth", "with_truth", with_truth);
  merge_flag(cmd, config, "--out", "out", out);
  const std::uint64_t seed = args.seed.resolve(cmd, config);

  if (scenario.empty()) throw input_error("simulate: --scenario is required");
  if (out.empty()) throw input_error("simulate: --out is required");
  if (n < 1) throw input_error("simulate: --n must be positive");

  Scenario which;
  try {
    which = scenario_from_name(scenario);
  } catch (const input_error&) {
    std::string names;
    for (const auto& s : scenario_names()) names += " " + s;
    throw input_error("unknown scenario '" + scenario + "'; valid names:" + names);
  }

  const SimData sim = generate({which, n, seed});
  const bool paired = scenario_is_bivariate(which);

  std::vector<std::string> header;
  if (paired) header = {"y1", "y2"};
  else header = {"y"};
  if (with_truth) {
    if (paired) {
      header.push_back("theta1");
      header.push_back("theta2");
    } else {
      header.push_back("theta");
    }
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<double> row;
    for (int c = 0; c < sim.y.cols(); ++c) row.push_back(sim.y(i, c));
    if (with_truth)
      for (int c = 0; c < sim.theta.cols(); ++c) row.push_back(sim.theta(i, c));
    rows.push_back(std::move(row));
  }
  write_csv(out, header, rows);
}

}  // namespace

void register_simulate(CLI::App& app) {
  auto args = std::make_shared<SimulateArgs>();
  CLI::App* cmd = app.add_subcommand("simulate", "draw a synthetic dataset");
  cmd->add_option("--scenario", args->scenario, "generator name");
  cmd->add_option("--n", args->n, "sample size");
  args->seed.register_flag(*cmd);
  cmd->add_option("--out", args->out, "output CSV path");
  cmd->add_flag("--with-truth", args->with_truth, "append latent theta columns");
  cmd->add_option("--config", args->config, "JSON config file");
  cmd->callback([args, cmd] { run(*args, *cmd); });
}

}  // namespace mixdens::cli

#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "mixdens/baselines.hpp"
#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"
#include "mixdens/metrics.hpp"
#include "mixdens/mlp.hpp"
#include "mixdens/optimizer.hpp"
#include "mixdens/simulate.hpp"

namespace mixdens::cli {

// Exit codes: 0 ok, 2 bad arguments, 3 data problems, 4 numeric failures.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Flags shared by every estimator-running command.
struct EstimatorArgs {
  std::string estimator = "neuralg";
  // kernel
  std::string kernel = "normal";
  double sigma = 1.0;
  // grid
  int grid_size = 100;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  // network and optimizer
  int layers = 4;
  int width = 500;
  double weight = 0.6;
  int epochs = 8000;
  int batch_size = 0;  // 0 -> ceil(n/10) capped at 512
  double eta = 3e-4;
  double decay = 0.2;
  double stop_tol = 0.01;
  int stop_lag = 10;
  // baselines
  int efron_df = 5;
  double efron_lambda = 1.0;
  long em_iters = 20000;
  double em_tol = 1e-10;

  void register_flags(CLI::App& cmd, bool with_estimator = true);
  KernelSpec kernel_spec() const;
  Grid make_grid(std::span<const double> data) const;
  MlpArchitecture architecture(int m, int input_dim = 1) const;
  TrainConfig train_config(std::uint64_t seed) const;
  NpmleOptions npmle_options() const;
};

/// Seed resolution: --seed flag, then config file, then MIXDENS_SEED, then 1.
struct SeedArg {
  std::uint64_t seed = 1;
  void register_flag(CLI::App& cmd);
  std::uint64_t resolve(const CLI::App& cmd, const nlohmann::json& config) const;
};

/// JSON config support: values fill any flag the command line left unset.
nlohmann::json load_config(const std::string& path);

template <typename T>
void merge_flag(const CLI::App& cmd, const nlohmann::json& config,
                const std::string& flag, const std::string& key, T& value) {
  if (cmd.count(flag) == 0 && config.contains(key)) value = config.at(key).get<T>();
}

void merge_estimator_args(const CLI::App& cmd, const nlohmann::json& config,
                          EstimatorArgs& args);

/// One fitted prior via whichever estimator the flags selected.
struct FitOutcome {
  MixingPMF pmf;
  std::string estimator;
  std::vector<TraceEntry> trace;
  nlohmann::json model;  // estimator-specific document
};

FitOutcome run_estimator(const EstimatorArgs& args, const KernelSpec& spec,
                         std::span<const double> data, const Grid& grid,
                         std::uint64_t seed);

/// Truth construction for evaluate-style commands.
TruePrior truth_from_scenario(const std::string& scenario);
TruePrior truth_from_spec_file(const std::string& path);

/// Density CSV helpers (theta,prob or theta1,theta2,prob).
void write_density_csv(const std::string& path, const MixingPMF& pmf);
MixingPMF read_density_csv(const std::string& path);

std::vector<double> read_univariate_csv(const std::string& path);
Eigen::MatrixXd read_response_csv(const std::string& path, bool& bivariate);

void write_text(const std::string& path, const std::string& text);

}  // namespace mixdens::cli

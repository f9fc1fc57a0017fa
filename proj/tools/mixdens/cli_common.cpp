#include "cli_common.hpp"

#include <cstdlib>
#include <fstream>

#include "mixdens/csv.hpp"
#include "mixdens/errors.hpp"

namespace mixdens::cli {

void EstimatorArgs::register_flags(CLI::App& cmd, bool with_estimator) {
  if (with_estimator)
    cmd.add_option("--estimator", estimator, "neuralg | npmle | efron")
        ->check(CLI::IsMember({"neuralg", "npmle", "efron"}));
  cmd.add_option("--kernel", kernel, "normal | poisson | lognormal")
      ->check(CLI::IsMember({"normal", "poisson", "lognormal"}));
  cmd.add_option("--sigma", sigma, "fixed kernel scale (normal, lognormal)");
  cmd.add_option("--grid-size", grid_size, "number of support points");
  cmd.add_option("--grid-min", [this](const CLI::results_t& res) {
        grid_min = std::stod(res[0]);
        return true;
      }, "support lower end (default: data minimum)");
  cmd.add_option("--grid-max", [this](const CLI::results_t& res) {
        grid_max = std::stod(res[0]);
        return true;
      }, "support upper end (default: data maximum)");
  cmd.add_option("--layers", layers, "hidden layers");
  cmd.add_option("--width", width, "hidden width");
  cmd.add_option("--weight", weight, "blend weight on the current gradient");
  cmd.add_option("--epochs", epochs, "epoch budget");
  cmd.add_option("--batch-size", batch_size, "minibatch size (0 derives it)");
  cmd.add_option("--eta", eta, "base step size");
  cmd.add_option("--decay", decay, "step decay exponent");
  cmd.add_option("--stop-tol", stop_tol, "stopping tolerance");
  cmd.add_option("--stop-lag", stop_lag, "stopping lag");
  cmd.add_option("--df", efron_df, "spline degrees of freedom");
  cmd.add_option("--lambda", efron_lambda, "penalty strength");
  cmd.add_option("--em-iters", em_iters, "EM iteration cap");
  cmd.add_option("--em-tol", em_tol, "EM improvement tolerance");
}

KernelSpec EstimatorArgs::kernel_spec() const {
  if (kernel == "normal") return KernelSpec::normal_location(sigma);
  if (kernel == "poisson") return KernelSpec::poisson();
  if (kernel == "lognormal") return KernelSpec::log_normal(sigma);
  throw input_error("unknown kernel '" + kernel + "'");
}

Grid EstimatorArgs::make_grid(std::span<const double> data) const {
  if (grid_min && grid_max) return Grid::equispaced(*grid_min, *grid_max, grid_size);
  Grid base = default_grid(data, grid_size);
  if (!grid_min && !grid_max) return base;
  const double lo = grid_min ? *grid_min : base.at(0);
  const double hi = grid_max ? *grid_max : base.at(grid_size - 1);
  return Grid::equispaced(lo, hi, grid_size);
}

MlpArchitecture EstimatorArgs::architecture(int m, int input_dim) const {
  return MlpArchitecture{input_dim, layers, width, m};
}

TrainConfig EstimatorArgs::train_config(std::uint64_t seed) const {
  TrainConfig cfg;
  cfg.batch_size = batch_size;
  cfg.max_epochs = epochs;
  cfg.weight = weight;
  cfg.base_step = eta;
  cfg.step_decay = decay;
  cfg.stop_tol = stop_tol;
  cfg.stop_lag = stop_lag;
  cfg.seed = seed;
  return cfg;
}

NpmleOptions EstimatorArgs::npmle_options() const {
  return NpmleOptions{em_iters, em_tol};
}

void SeedArg::register_flag(CLI::App& cmd) {
  cmd.add_option("--seed", seed, "master seed");
}

std::uint64_t SeedArg::resolve(const CLI::App& cmd, const nlohmann::json& config) const {
  if (cmd.count("--seed") > 0) return seed;
  if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
  if (const char* env = std::getenv("MIXDENS_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw input_error("MIXDENS_SEED must be an unsigned integer");
    return static_cast<std::uint64_t>(v);
  }
  return seed;
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config '" + path + "'");
  try {
    nlohmann::json cfg;
    in >> cfg;
    if (!cfg.is_object()) throw input_error("config must be a JSON object");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad config: ") + e.what());
  }
}

void merge_estimator_args(const CLI::App& cmd, const nlohmann::json& config,
                          EstimatorArgs& args) {
  if (cmd.get_option_no_throw("--estimator"))
    merge_flag(cmd, config, "--estimator", "estimator", args.estimator);
  merge_flag(cmd, config, "--kernel", "kernel", args.kernel);
  merge_flag(cmd, config, "--sigma", "sigma", args.sigma);
  merge_flag(cmd, config, "--grid-size", "grid_size", args.grid_size);
  if (cmd.count("--grid-min") == 0 && config.contains("grid_min"))
    args.grid_min = config.at("grid_min").get<double>();
  if (cmd.count("--grid-max") == 0 && config.contains("grid_max"))
    args.grid_max = config.at("grid_max").get<double>();
  merge_flag(cmd, config, "--layers", "layers", args.layers);
  merge_flag(cmd, config, "--width", "width", args.width);
  merge_flag(cmd, config, "--weight", "weight", args.weight);
  merge_flag(cmd, config, "--epochs", "epochs", args.epochs);
  merge_flag(cmd, config, "--batch-size", "batch_size", args.batch_size);
  merge_flag(cmd, config, "--eta", "eta", args.eta);
  merge_flag(cmd, config, "--decay", "decay", args.decay);
  merge_flag(cmd, config, "--stop-tol", "stop_tol", args.stop_tol);
  merge_flag(cmd, config, "--stop-lag", "stop_lag", args.stop_lag);
  merge_flag(cmd, config, "--df", "df", args.efron_df);
  merge_flag(cmd, config, "--lambda", "lambda", args.efron_lambda);
  merge_flag(cmd, config, "--em-iters", "em_iters", args.em_iters);
  merge_flag(cmd, config, "--em-tol", "em_tol", args.em_tol);
}

FitOutcome run_estimator(const EstimatorArgs& args, const KernelSpec& spec,
                         std::span<const double> data, const Grid& grid,
                         std::uint64_t seed) {
  if (args.estimator == "neuralg") {
    const TrainResult fit = train_neural_g(
        data, spec, grid, args.architecture(grid.size()), args.train_config(seed));
    nlohmann::json model = nlohmann::json::parse(model_to_json(fit.model));
    model["estimator"] = "neuralg";
    model["stopped_early"] = fit.stopped_early;
    return {fit.pmf, "neuralg", fit.trace, std::move(model)};
  }

  const KernelMatrix F = build_kernel_matrix(spec, data, grid);
  if (args.estimator == "npmle") {
    const NpmleResult fit = npmle_em(F, grid, args.npmle_options());
    std::vector<TraceEntry> trace;
    for (std::size_t k = 0; k < fit.nll_trace.size(); ++k)
      trace.push_back({static_cast<long>(k), static_cast<int>(k), fit.nll_trace[k]});
    nlohmann::json model{{"estimator", "npmle"},
                         {"iterations", fit.nll_trace.size() - 1},
                         {"converged", fit.converged}};
    return {fit.pmf, "npmle", std::move(trace), std::move(model)};
  }

  if (args.estimator == "efron") {
    const SplineBasis basis = spline_basis(grid, args.efron_df);
    const EfronResult fit = efron_fit(F, grid, basis, args.efron_lambda);
    std::vector<TraceEntry> trace;
    for (std::size_t k = 0; k < fit.objective_trace.size(); ++k)
      trace.push_back({static_cast<long>(k), static_cast<int>(k), fit.objective_trace[k]});
    nlohmann::json model{{"estimator", "efron"},
                         {"df", args.efron_df},
                         {"lambda", args.efron_lambda},
                         {"converged", fit.converged}};
    model["alpha"] = std::vector<double>(
        fit.params.alpha.data(), fit.params.alpha.data() + fit.params.alpha.size());
    return {fit.pmf, "efron", std::move(trace), std::move(model)};
  }

  throw input_error("unknown estimator '" + args.estimator + "'");
}

TruePrior truth_from_scenario(const std::string& scenario) {
  const SimData probe = generate({scenario_from_name(scenario), 1, 1});
  if (!probe.truth)
    throw input_error("scenario '" + scenario + "' has no univariate truth");
  return *probe.truth;
}

TruePrior truth_from_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open truth spec '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad truth spec: ") + e.what());
  }
  const std::string family = doc.at("family").get<std::string>();
  if (family == "uniform")
    return TruePrior::uniform(doc.at("lo").get<double>(), doc.at("hi").get<double>());
  if (family == "piecewise")
    return TruePrior::piecewise(doc.at("breaks").get<std::vector<double>>(),
                                doc.at("probs").get<std::vector<double>>());
  if (family == "gumbel")
    return TruePrior::gumbel(doc.at("loc").get<double>(), doc.at("scale").get<double>());
  if (family == "beta")
    return TruePrior::beta(doc.at("a").get<double>(), doc.at("b").get<double>());
  if (family == "gaussian")
    return TruePrior::gaussian(doc.at("mean").get<double>(), doc.at("sd").get<double>());
  if (family == "atoms")
    return TruePrior::atoms(doc.at("points").get<std::vector<double>>(),
                            doc.at("probs").get<std::vector<double>>());
  throw input_error("unknown truth family '" + family + "'");
}

void write_density_csv(const std::string& path, const MixingPMF& pmf) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(pmf.size()));
  if (pmf.grid().dim() == 1) {
    for (int j = 0; j < pmf.size(); ++j)
      rows.push_back({pmf.grid().at(j), pmf.weights()[j]});
    write_csv(path, {"theta", "prob"}, rows);
  } else {
    for (int j = 0; j < pmf.size(); ++j)
      rows.push_back({pmf.grid().points()(j, 0), pmf.grid().points()(j, 1),
                      pmf.weights()[j]});
    write_csv(path, {"theta1", "theta2", "prob"}, rows);
  }
}

MixingPMF read_density_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int prob = table.column("prob");
  if (prob < 0) throw data_error("density CSV '" + path + "' lacks a prob column");

  if (table.column("theta") >= 0) {
    const auto pts = table.column_values(table.column("theta"));
    Eigen::VectorXd w(static_cast<int>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      w[static_cast<int>(i)] = table.rows[i][static_cast<std::size_t>(prob)];
    return MixingPMF(Grid::from_points(pts), w);
  }
  const int t1 = table.column("theta1");
  const int t2 = table.column("theta2");
  if (t1 < 0 || t2 < 0)
    throw data_error("density CSV '" + path + "' lacks theta columns");
  Eigen::MatrixXd pts(static_cast<int>(table.rows.size()), 2);
  Eigen::VectorXd w(static_cast<int>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    pts(static_cast<int>(i), 0) = table.rows[i][static_cast<std::size_t>(t1)];
    pts(static_cast<int>(i), 1) = table.rows[i][static_cast<std::size_t>(t2)];
    w[static_cast<int>(i)] = table.rows[i][static_cast<std::size_t>(prob)];
  }
  return MixingPMF(Grid(std::move(pts)), w);
}

std::vector<double> read_univariate_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int y = table.column("y");
  if (y < 0) throw data_error("data CSV '" + path + "' lacks a y column");
  if (table.rows.empty()) throw data_error("data CSV '" + path + "' is empty");
  return table.column_values(y);
}

Eigen::MatrixXd read_response_csv(const std::string& path, bool& bivariate) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw data_error("data CSV '" + path + "' is empty");
  const int y = table.column("y");
  if (y >= 0) {
    bivariate = false;
    Eigen::MatrixXd out(static_cast<int>(table.rows.size()), 1);
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      out(static_cast<int>(i), 0) = table.rows[i][static_cast<std::size_t>(y)];
    return out;
  }
  const int y1 = table.column("y1");
  const int y2 = table.column("y2");
  if (y1 < 0 || y2 < 0)
    throw data_error("data CSV '" + path + "' needs a y column or y1,y2 columns");
  bivariate = true;
  Eigen::MatrixXd out(static_cast<int>(table.rows.size()), 2);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out(static_cast<int>(i), 0) = table.rows[i][static_cast<std::size_t>(y1)];
    out(static_cast<int>(i), 1) = table.rows[i][static_cast<std::size_t>(y2)];
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open '" + path + "' for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace mixdens::cli

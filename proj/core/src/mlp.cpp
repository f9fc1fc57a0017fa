#include "mixdens/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>

#include "mixdens/errors.hpp"
#include "mixdens/likelihood.hpp"
#include "mixdens/rng.hpp"

namespace mixdens {

namespace {

using nlohmann::json;

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return std::string(buf);
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw input_error("model_from_json: bad float literal");
  return v;
}

json tensor_to_json(const Eigen::MatrixXd& t) {
  json data = json::array();
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j) data.push_back(hex_double(t(i, j)));
  return json{{"rows", t.rows()}, {"cols", t.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd tensor_from_json(const json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto& data = j.at("data");
  if (static_cast<int>(data.size()) != rows * cols)
    throw input_error("model_from_json: tensor size mismatch");
  Eigen::MatrixXd t(rows, cols);
  int k = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c)
      t(i, c) = parse_hex_double(data[k++].get<std::string>());
  return t;
}

void check_shapes(const MlpModel& model) {
  const auto& a = model.arch;
  a.validate();
  const int layers = a.layer_count();
  if (static_cast<int>(model.weights.size()) != layers ||
      static_cast<int>(model.biases.size()) != layers)
    throw input_error("MlpModel: layer count mismatch");
  for (int k = 0; k < layers; ++k) {
    const int in = (k == 0) ? a.input_dim : a.hidden_width;
    const int out = (k == layers - 1) ? a.output_dim : a.hidden_width;
    if (model.weights[k].rows() != out || model.weights[k].cols() != in ||
        model.biases[k].size() != out)
      throw input_error("MlpModel: layer " + std::to_string(k) + " has wrong shape");
    if (!model.weights[k].allFinite() || !model.biases[k].allFinite())
      throw input_error("MlpModel: parameters must be finite");
  }
}

}  // namespace

void MlpArchitecture::validate() const {
  if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1 || output_dim < 1)
    throw input_error("MlpArchitecture: all dimensions must be positive");
}

long MlpModel::parameter_count() const {
  long n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

GradientSet GradientSet::zeros_like(const MlpModel& model) {
  GradientSet g;
  g.weights.reserve(model.weights.size());
  g.biases.reserve(model.biases.size());
  for (const auto& w : model.weights)
    g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : model.biases)
    g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

bool GradientSet::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

void GradientSet::axpy(double a, const GradientSet& g) {
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] += a * g.weights[k];
  for (std::size_t k = 0; k < biases.size(); ++k) biases[k] += a * g.biases[k];
}

void GradientSet::scale(double a) {
  for (auto& w : weights) w *= a;
  for (auto& b : biases) b *= a;
}

MlpModel init_model(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  MlpModel model;
  model.arch = arch;
  const int layers = arch.layer_count();
  model.weights.reserve(layers);
  model.biases.reserve(layers);
  for (int k = 0; k < layers; ++k) {
    const int in = (k == 0) ? arch.input_dim : arch.hidden_width;
    const int out = (k == layers - 1) ? arch.output_dim : arch.hidden_width;
    Eigen::MatrixXd w(out, in);
    if (k == layers - 1) {
      w.setZero();
    } else {
      const double sd = std::sqrt(2.0 / static_cast<double>(in));
      for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j) w(i, j) = sd * rng.normal();
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return model;
}

ForwardCache forward_network(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  check_shapes(model);
  if (inputs.rows() != model.arch.input_dim)
    throw input_error("forward_network: input dimension mismatch");
  const int m = static_cast<int>(inputs.cols());
  if (m != model.arch.output_dim)
    throw input_error("forward_network: expected one input column per support point");

  ForwardCache cache;
  cache.activations.reserve(static_cast<std::size_t>(model.arch.hidden_layers));
  const Eigen::MatrixXd* prev = &inputs;
  for (int k = 0; k < model.arch.hidden_layers; ++k) {
    Eigen::MatrixXd z =
        ((model.weights[static_cast<std::size_t>(k)] * (*prev)).colwise() +
         model.biases[static_cast<std::size_t>(k)])
            .cwiseMax(0.0);
    cache.activations.push_back(std::move(z));
    prev = &cache.activations.back();
  }

  const auto& w_out = model.weights.back();
  const auto& b_out = model.biases.back();
  // logit_j = w_out.row(j) . z_j + b_out_j; only the diagonal of the full
  // affine map is needed.
  cache.logits =
      (w_out.array() * prev->transpose().array()).rowwise().sum().matrix();
  cache.logits += b_out;
  cache.pmf = softmax(cache.logits);
  return cache;
}

MixingPMF forward_pmf(const MlpModel& model, const Grid& grid) {
  if (grid.dim() != model.arch.input_dim)
    throw input_error("forward_pmf: grid dimension mismatch");
  const ForwardCache cache = forward_network(model, grid.points().transpose());
  return MixingPMF(grid, cache.pmf);
}

Eigen::VectorXd softmax_backward(const Eigen::VectorXd& pmf,
                                 const Eigen::VectorXd& dpmf) {
  const double inner = pmf.dot(dpmf);
  return pmf.array() * (dpmf.array() - inner);
}

GradientSet backward_network(const MlpModel& model, const ForwardCache& cache,
                             const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& dlogits) {
  GradientSet grad;
  const int hidden = model.arch.hidden_layers;
  grad.weights.resize(static_cast<std::size_t>(hidden) + 1);
  grad.biases.resize(static_cast<std::size_t>(hidden) + 1);

  const Eigen::MatrixXd& z_last = cache.activations.back();

  // Output layer: each support point touches only its own row.
  grad.weights.back() = dlogits.asDiagonal() * z_last.transpose();
  grad.biases.back() = dlogits;

  // d(loss)/d(z_last), column j scaled by dlogits_j.
  Eigen::MatrixXd dz = model.weights.back().transpose() * dlogits.asDiagonal();

  for (int k = hidden - 1; k >= 0; --k) {
    const Eigen::MatrixXd& act = cache.activations[static_cast<std::size_t>(k)];
    // ReLU mask; act == 0 kills the path (subgradient 0 at the kink).
    Eigen::MatrixXd da =
        ((act.array() > 0.0).cast<double>() * dz.array()).matrix();
    const Eigen::MatrixXd& below =
        (k == 0) ? inputs : cache.activations[static_cast<std::size_t>(k) - 1];
    grad.weights[static_cast<std::size_t>(k)] = da * below.transpose();
    grad.biases[static_cast<std::size_t>(k)] = da.rowwise().sum();
    if (k > 0) dz = model.weights[static_cast<std::size_t>(k)].transpose() * da;
  }
  return grad;
}

MixtureBatchGrad mixture_batch_grad(const Eigen::MatrixXd& F,
                                    std::span<const int> rows,
                                    const Eigen::VectorXd& pmf) {
  if (rows.empty()) throw input_error("mixture_batch_grad: empty batch");
  const double inv_s = 1.0 / static_cast<double>(rows.size());
  MixtureBatchGrad out;
  out.loss = 0.0;
  out.dpmf = Eigen::VectorXd::Zero(pmf.size());
  for (const int i : rows) {
    const double r = mixture_row_dot(F, i, pmf);
    if (!(r > 0.0) || !std::isfinite(r))
      throw numeric_error("mixture_batch_grad: observation " + std::to_string(i) +
                          " has zero or nonfinite mixture density");
    out.loss -= std::log(r);
    const double c = inv_s / r;
    for (int j = 0; j < pmf.size(); ++j) out.dpmf[j] -= c * F(i, j);
  }
  out.loss *= inv_s;
  return out;
}

std::pair<double, GradientSet> loss_and_gradient(const MlpModel& model,
                                                 const KernelMatrix& F_batch,
                                                 const Grid& grid) {
  if (F_batch.cols() != grid.size())
    throw input_error("loss_and_gradient: kernel matrix does not match grid");
  const Eigen::MatrixXd inputs = grid.points().transpose();
  const ForwardCache cache = forward_network(model, inputs);

  std::vector<int> rows(static_cast<std::size_t>(F_batch.rows()));
  for (int i = 0; i < F_batch.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  const MixtureBatchGrad mbg = mixture_batch_grad(F_batch.values(), rows, cache.pmf);

  const Eigen::VectorXd dlogits = softmax_backward(cache.pmf, mbg.dpmf);
  return {mbg.loss, backward_network(model, cache, inputs, dlogits)};
}

std::string model_to_json(const MlpModel& model) {
  check_shapes(model);
  json doc;
  doc["architecture"] = {{"input_dim", model.arch.input_dim},
                         {"hidden_layers", model.arch.hidden_layers},
                         {"hidden_width", model.arch.hidden_width},
                         {"output_dim", model.arch.output_dim}};
  doc["weights"] = json::array();
  doc["biases"] = json::array();
  for (const auto& w : model.weights) doc["weights"].push_back(tensor_to_json(w));
  for (const auto& b : model.biases) {
    Eigen::MatrixXd col = b;
    doc["biases"].push_back(tensor_to_json(col));
  }
  return doc.dump(2);
}

MlpModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("model_from_json: ") + e.what());
  }
  MlpModel model;
  const auto& a = doc.at("architecture");
  model.arch.input_dim = a.at("input_dim").get<int>();
  model.arch.hidden_layers = a.at("hidden_layers").get<int>();
  model.arch.hidden_width = a.at("hidden_width").get<int>();
  model.arch.output_dim = a.at("output_dim").get<int>();
  for (const auto& t : doc.at("weights")) model.weights.push_back(tensor_from_json(t));
  for (const auto& t : doc.at("biases")) {
    Eigen::MatrixXd col = tensor_from_json(t);
    if (col.cols() != 1) throw input_error("model_from_json: bias must be a column");
    model.biases.push_back(col.col(0));
  }
  check_shapes(model);
  return model;
}

}  // namespace mixdens

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"

namespace mixdens {

struct MlpArchitecture {
  int input_dim = 1;
  int hidden_layers = 4;
  int hidden_width = 500;
  int output_dim = 100;

  void validate() const;
  /// Hidden layers plus the output layer.
  int layer_count() const { return hidden_layers + 1; }
};

/// Fully connected ReLU network that scores every support point.
///
/// Layer k < L maps R^h -> R^h (layer 0 maps R^d -> R^h). The output layer
/// holds one h-vector of weights and one bias per support point: point j is
/// pushed through the shared hidden stack to z_j, its logit is
/// weights[L].row(j) . z_j + biases[L][j], and the PMF is the softmax of the
/// m logits taken jointly.
struct MlpModel {
  MlpArchitecture arch;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  long parameter_count() const;
};

/// One slot per parameter tensor, shape-congruent with its model.
struct GradientSet {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static GradientSet zeros_like(const MlpModel& model);
  bool all_finite() const;
  void axpy(double a, const GradientSet& g);  // this += a * g
  void scale(double a);
};

/// Deterministic init: hidden weights ~ N(0, 2/fan_in), all biases zero, and
/// a zero output layer so every freshly built model starts at the uniform
/// prior.
MlpModel init_model(const MlpArchitecture& arch, std::uint64_t seed);

/// Everything the backward pass needs from one evaluation of the network on
/// a fixed set of inputs (columns of a d x m matrix).
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // post-ReLU, one h x m per hidden layer
  Eigen::VectorXd logits;                    // m
  Eigen::VectorXd pmf;                       // softmax(logits)
};

ForwardCache forward_network(const MlpModel& model, const Eigen::MatrixXd& inputs);

MixingPMF forward_pmf(const MlpModel& model, const Grid& grid);

/// dL/dlogits for a loss with gradient dL/dpmf at pmf = softmax(logits).
Eigen::VectorXd softmax_backward(const Eigen::VectorXd& pmf,
                                 const Eigen::VectorXd& dpmf);

/// Reverse-mode pass from dL/dlogits down to every weight and bias.
GradientSet backward_network(const MlpModel& model, const ForwardCache& cache,
                             const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& dlogits);

/// Batch mixture loss and its gradient in the PMF, evaluated over the given
/// rows of F: loss = -(1/S) sum log(F_i . pmf), dpmf = -(1/S) sum F_i / r_i.
struct MixtureBatchGrad {
  double loss;
  Eigen::VectorXd dpmf;
};
MixtureBatchGrad mixture_batch_grad(const Eigen::MatrixXd& F,
                                    std::span<const int> rows,
                                    const Eigen::VectorXd& pmf);

/// Batch negative log-likelihood and its exact gradient with respect to every
/// parameter. The batch enters only through the PMF, so the network is
/// evaluated once on the grid regardless of batch size.
std::pair<double, GradientSet> loss_and_gradient(const MlpModel& model,
                                                 const KernelMatrix& F_batch,
                                                 const Grid& grid);

/// Flat JSON document: architecture block plus row-major parameter arrays in
/// hex-float, so a round trip is bit-exact.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

}  // namespace mixdens

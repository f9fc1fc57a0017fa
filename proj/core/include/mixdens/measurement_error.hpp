#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "mixdens/baselines.hpp"
#include "mixdens/grid.hpp"
#include "mixdens/optimizer.hpp"

namespace mixdens {

/// Plug-in error variance from duplicate measurements: with pair differences
/// d_i = y_i1 - y_i2 distributed N(0, 2 sigma^2), half the sample variance
/// of the differences recovers sigma^2.
double plug_in_sigma2(const Eigen::MatrixXd& pairs);

enum class EstimatorKind { NeuralG, Npmle, Efron };

struct HomogeneousFitOptions {
  EstimatorKind estimator = EstimatorKind::NeuralG;
  int grid_size = 100;
  MlpArchitecture arch{};     // output_dim set from the grid
  TrainConfig train{};
  NpmleOptions npmle{};
  int efron_df = 5;
  double efron_lambda = 1.0;
  EfronOptions efron{};
};

struct HomogeneousFit {
  MixingPMF pmf;
  double sigma2_hat;
  Grid grid;
};

/// Homogeneous-error reduction: average each pair to ybar_i, model
/// ybar_i | mu_i ~ N(mu_i, sigma2_hat / 2) with the plug-in variance, and fit
/// the chosen estimator for the latent mu density. `grid` defaults to the
/// equispaced grid over the averaged responses.
HomogeneousFit fit_homogeneous(const Eigen::MatrixXd& pairs,
                               const std::optional<Grid>& grid,
                               const HomogeneousFitOptions& opts);

}  // namespace mixdens

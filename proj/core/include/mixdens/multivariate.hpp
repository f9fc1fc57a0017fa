#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mixdens/grid.hpp"
#include "mixdens/optimizer.hpp"

namespace mixdens {

/// Representative (mu, sigma^2) support selected from paired responses.
///
/// Per observation the closed-form conditional MLEs are mu_i = mean of the
/// pair and s2_i = (y_i1 - y_i2)^2 / 2; the m representatives are seeded
/// k-means centers of the standardized (mu, log s2) cloud mapped back to the
/// original scale. `center` / `scale` record that standardization so callers
/// can measure distances in the same coordinates. Points are canonically
/// sorted before clustering, making the selection invariant to input order
/// under a fixed seed.
struct GridSelection {
  Grid grid;
  Eigen::Vector2d center;  // means of (mu, log s2)
  Eigen::Vector2d scale;   // standard deviations of (mu, log s2)
  bool degenerate = false;  // all observations identical; grid has one point
};

GridSelection select_grid_bivariate(const Eigen::MatrixXd& pairs, int m,
                                    std::uint64_t seed);

/// Map a (mu, sigma^2) point into the selection's standardized coordinates.
Eigen::Vector2d standardize_point(const GridSelection& selection, double mu,
                                  double s2);

/// Bivariate fit under the location-scale kernel
/// f(y | mu, s2) = N(y1; mu, s2) N(y2; mu, s2). Same training contract as
/// the univariate estimator with each support point fed to the network as a
/// standardized 2-vector (raw sigma^2 spans orders of magnitude and stalls
/// ReLU training).
TrainResult fit_multivariate_neural_g(const Eigen::MatrixXd& pairs,
                                      const Grid& grid,
                                      const MlpArchitecture& arch,
                                      const TrainConfig& cfg);

}  // namespace mixdens

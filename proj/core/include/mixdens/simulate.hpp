#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"
#include "mixdens/metrics.hpp"

namespace mixdens {

enum class Scenario {
  Uniform,      // y | theta ~ N(theta, 1),    theta ~ U(-2, 2)
  Piecewise,    // y | theta ~ N(theta, 1),    theta ~ 0.4 U(-2,-1) + 0.2 U(-1,1) + 0.4 U(1,2)
  Gumbel,       // y | theta ~ N(theta, 1),    theta ~ Gumbel(2, 1)
  Bounded,      // y | theta ~ LogNormal(theta, 0.2), theta ~ Beta(3, 2)
  PointMass,    // y | theta ~ N(theta, 0.5),  theta in {-5, 0, 5} w.p. {.3, .4, .3}
  Gaussian,     // y | theta ~ N(theta, 1),    theta ~ N(0, 1)
  BiPointMass,  // paired y; (mu, s2) = (0, 1.0) w.p. 0.2, (2, 0.1) w.p. 0.8
  BiNig         // paired y; s2 ~ InvGamma(2, 0.5), mu | s2 ~ N(1, s2)
};

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);
std::vector<std::string> scenario_names();
bool scenario_is_bivariate(Scenario s);

struct ScenarioSpec {
  Scenario name = Scenario::Gaussian;
  int n = 1;
  std::uint64_t seed = 0;
};

/// A bivariate atom with its mass, for the paired point-mass truth.
struct BiAtom {
  Eigen::Vector2d theta;  // (mu, sigma^2)
  double prob;
};

struct SimData {
  Eigen::MatrixXd y;      // n x 1 or n x 2
  Eigen::MatrixXd theta;  // matching latent draws
  KernelSpec kernel;
  std::optional<TruePrior> truth;       // univariate scenarios
  std::vector<BiAtom> bivariate_atoms;  // BiPointMass only

  std::vector<double> y_column(int c = 0) const;
};

/// Draw theta_i from the scenario prior, then y_i from its kernel. The
/// returned kernel and truth descriptions match the generator exactly so
/// downstream scoring needs no re-specification.
SimData generate(const ScenarioSpec& spec);

/// m equispaced support points from min(y) to max(y) inclusive.
Grid default_grid(std::span<const double> data, int m = 100);

}  // namespace mixdens

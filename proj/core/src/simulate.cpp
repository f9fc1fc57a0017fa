#include "mixdens/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "mixdens/errors.hpp"
#include "mixdens/rng.hpp"

namespace mixdens {

Scenario scenario_from_name(const std::string& name) {
  if (name == "uniform") return Scenario::Uniform;
  if (name == "piecewise") return Scenario::Piecewise;
  if (name == "gumbel") return Scenario::Gumbel;
  if (name == "bounded") return Scenario::Bounded;
  if (name == "pointmass") return Scenario::PointMass;
  if (name == "gaussian") return Scenario::Gaussian;
  if (name == "bi_pointmass") return Scenario::BiPointMass;
  if (name == "bi_nig") return Scenario::BiNig;
  throw input_error("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Uniform: return "uniform";
    case Scenario::Piecewise: return "piecewise";
    case Scenario::Gumbel: return "gumbel";
    case Scenario::Bounded: return "bounded";
    case Scenario::PointMass: return "pointmass";
    case Scenario::Gaussian: return "gaussian";
    case Scenario::BiPointMass: return "bi_pointmass";
    case Scenario::BiNig: return "bi_nig";
  }
  return "unknown";
}

std::vector<std::string> scenario_names() {
  return {"uniform",   "piecewise", "gumbel",       "bounded",
          "pointmass", "gaussian",  "bi_pointmass", "bi_nig"};
}

bool scenario_is_bivariate(Scenario s) {
  return s == Scenario::BiPointMass || s == Scenario::BiNig;
}

std::vector<double> SimData::y_column(int c) const {
  std::vector<double> out(static_cast<std::size_t>(y.rows()));
  for (int i = 0; i < y.rows(); ++i) out[static_cast<std::size_t>(i)] = y(i, c);
  return out;
}

namespace {

constexpr double kPointMassAtoms[3] = {-5.0, 0.0, 5.0};
constexpr double kPointMassProbs[3] = {0.3, 0.4, 0.3};

double draw_theta(Scenario s, Rng& rng) {
  switch (s) {
    case Scenario::Uniform:
      return rng.uniform(-2.0, 2.0);
    case Scenario::Piecewise: {
      const double segments[3] = {0.4, 0.2, 0.4};
      const std::size_t k = rng.categorical(segments);
      if (k == 0) return rng.uniform(-2.0, -1.0);
      if (k == 1) return rng.uniform(-1.0, 1.0);
      return rng.uniform(1.0, 2.0);
    }
    case Scenario::Gumbel:
      return rng.gumbel(2.0, 1.0);
    case Scenario::Bounded:
      return rng.beta(3.0, 2.0);
    case Scenario::PointMass:
      return kPointMassAtoms[rng.categorical(kPointMassProbs)];
    case Scenario::Gaussian:
      return rng.normal();
    default:
      throw input_error("draw_theta: bivariate scenario");
  }
}

}  // namespace

SimData generate(const ScenarioSpec& spec) {
  if (spec.n < 1) throw input_error("generate: n must be >= 1");
  Rng rng(spec.seed);
  const int n = spec.n;

  if (!scenario_is_bivariate(spec.name)) {
    KernelSpec kernel = KernelSpec::normal_location(1.0);
    std::optional<TruePrior> truth;
    switch (spec.name) {
      case Scenario::Uniform:
        truth = TruePrior::uniform(-2.0, 2.0);
        break;
      case Scenario::Piecewise:
        truth = TruePrior::piecewise({-2.0, -1.0, 1.0, 2.0}, {0.4, 0.2, 0.4});
        break;
      case Scenario::Gumbel:
        truth = TruePrior::gumbel(2.0, 1.0);
        break;
      case Scenario::Bounded:
        kernel = KernelSpec::log_normal(0.2);
        truth = TruePrior::beta(3.0, 2.0);
        break;
      case Scenario::PointMass:
        // N(theta, 0.5) reads as variance 0.5.
        kernel = KernelSpec::normal_location(std::sqrt(0.5));
        truth = TruePrior::atoms({kPointMassAtoms[0], kPointMassAtoms[1], kPointMassAtoms[2]},
                                 {kPointMassProbs[0], kPointMassProbs[1], kPointMassProbs[2]});
        break;
      case Scenario::Gaussian:
        truth = TruePrior::gaussian(0.0, 1.0);
        break;
      default:
        break;
    }

    SimData out{Eigen::MatrixXd(n, 1), Eigen::MatrixXd(n, 1), kernel, truth, {}};
    for (int i = 0; i < n; ++i) {
      const double theta = draw_theta(spec.name, rng);
      out.theta(i, 0) = theta;
      switch (kernel.family()) {
        case KernelFamily::NormalLocation:
          out.y(i, 0) = rng.normal(theta, kernel.sigma());
          break;
        case KernelFamily::LogNormal:
          out.y(i, 0) = std::exp(rng.normal(theta, kernel.sigma()));
          break;
        default:
          throw input_error("generate: unexpected kernel");
      }
    }
    return out;
  }

  SimData out{Eigen::MatrixXd(n, 2), Eigen::MatrixXd(n, 2),
              KernelSpec::normal_location_scale(), std::nullopt, {}};
  if (spec.name == Scenario::BiPointMass) {
    out.bivariate_atoms = {{{0.0, 1.0}, 0.2}, {{2.0, 0.1}, 0.8}};
  }
  for (int i = 0; i < n; ++i) {
    double mu = 0.0, s2 = 1.0;
    if (spec.name == Scenario::BiPointMass) {
      const double probs[2] = {0.2, 0.8};
      const auto& atom = out.bivariate_atoms[rng.categorical(probs)];
      mu = atom.theta[0];
      s2 = atom.theta[1];
    } else {
      s2 = rng.inverse_gamma(2.0, 0.5);
      mu = rng.normal(1.0, std::sqrt(s2));
    }
    out.theta(i, 0) = mu;
    out.theta(i, 1) = s2;
    const double sd = std::sqrt(s2);
    out.y(i, 0) = rng.normal(mu, sd);
    out.y(i, 1) = rng.normal(mu, sd);
  }
  return out;
}

Grid default_grid(std::span<const double> data, int m) {
  if (data.empty()) throw input_error("default_grid: empty data");
  if (m < 2) throw input_error("default_grid: need at least two points");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  if (!(*lo_it < *hi_it))
    throw input_error("default_grid: data range is degenerate");
  return Grid::equispaced(*lo_it, *hi_it, m);
}

}  // namespace mixdens

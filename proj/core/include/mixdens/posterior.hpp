#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"

namespace mixdens {

/// Per-observation posteriors over the grid; row i is the PMF of theta given
/// y_i under the supplied prior.
struct PosteriorPMF {
  Grid grid;
  Eigen::MatrixXd weights;  // n x m, each row sums to one
};

/// Bayes rule row by row: weights(i, .) proportional to F(i, .) * prior.
PosteriorPMF posterior_pmf(const KernelMatrix& F, const MixingPMF& prior);

/// Posterior expectation per observation and grid coordinate (n x d).
Eigen::MatrixXd posterior_mean(const PosteriorPMF& post);

struct CredibleInterval {
  double lo;
  double hi;
};

/// Equal-tailed grid-point intervals. Each endpoint is the smallest support
/// point whose posterior CDF reaches the target quantile, which widens
/// intervals slightly on a discrete posterior rather than interpolating.
std::vector<CredibleInterval> credible_interval(const PosteriorPMF& post,
                                                double level = 0.95);

/// Fraction of true latent values falling inside their intervals.
double empirical_coverage(std::span<const double> true_thetas,
                          std::span<const CredibleInterval> intervals);

}  // namespace mixdens

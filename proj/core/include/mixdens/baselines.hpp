#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"

namespace mixdens {

struct NpmleOptions {
  long max_iters = 20000;
  double tol = 1e-10;  // minimum NLL improvement per iteration
};

struct NpmleResult {
  MixingPMF pmf;
  std::vector<double> nll_trace;  // NLL before any update, then after each
  bool converged;
};

/// Nonparametric MLE over the grid by multiplicative EM updates:
///   w_j <- w_j * (1/n) sum_i F_ij / (F_i . w).
/// Each update can only lower the NLL, so the trace is monotone. Weights
/// that decay below 1e-12 are reported as-is, never thresholded.
NpmleResult npmle_em(const KernelMatrix& F, const Grid& grid,
                     const NpmleOptions& opts = {});

/// Natural cubic spline basis over a univariate grid: boundary knots at the
/// grid endpoints, interior knots at equispaced grid quantiles, constant
/// dropped, columns centered. Centering removes the direction the
/// exponential-family normalizer absorbs anyway, so spans are to be read
/// modulo constants (the mirror-image grid likewise reproduces the mirrored
/// span rather than the same matrix).
struct SplineBasis {
  Eigen::MatrixXd Q;  // m x p
  int df = 0;
  std::vector<double> knots;  // boundary + interior, increasing
};

SplineBasis spline_basis(const Grid& grid, int p);

struct EfronParams {
  Eigen::VectorXd alpha;
  double lambda = 0.0;
};

/// pi_j proportional to exp(Q_j . alpha), normalized in the log domain.
MixingPMF efron_pmf(const Grid& grid, const SplineBasis& basis,
                    const Eigen::VectorXd& alpha);

struct EfronOptions {
  long max_iters = 5000;
  double grad_tol = 1e-6;  // sup-norm of the ascent gradient
};

struct EfronResult {
  MixingPMF pmf;
  EfronParams params;
  std::vector<double> objective_trace;
  bool converged;
};

/// Penalized exponential-family fit: gradient ascent with backtracking on
///   sum_i log(sum_j F_ij pi_j(alpha)) - lambda * ||alpha||_2
/// starting from alpha = 0 (penalty subgradient 0 there). Exhausting the
/// iteration budget returns the best iterate with converged = false.
EfronResult efron_fit(const KernelMatrix& F, const Grid& grid,
                      const SplineBasis& basis, double lambda,
                      const EfronOptions& opts = {});

}  // namespace mixdens

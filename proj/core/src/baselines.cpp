#include "mixdens/baselines.hpp"

#include <cmath>

#include "mixdens/errors.hpp"
#include "mixdens/likelihood.hpp"

namespace mixdens {

NpmleResult npmle_em(const KernelMatrix& F, const Grid& grid,
                     const NpmleOptions& opts) {
  if (F.cols() != grid.size())
    throw input_error("npmle_em: kernel matrix does not match grid");
  if (opts.max_iters < 1) throw input_error("npmle_em: max_iters must be >= 1");

  const auto& A = F.values();
  const int n = F.rows();
  const int m = F.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / m);

  NpmleResult result{MixingPMF(grid, w), {}, false};
  double nll = mixture_nll(A, w);
  result.nll_trace.push_back(nll);

  for (long it = 0; it < opts.max_iters; ++it) {
    const Eigen::VectorXd r_inv = (A * w).cwiseInverse();
    w = w.cwiseProduct(A.transpose() * r_inv) / static_cast<double>(n);
    w /= w.sum();  // exact in real arithmetic; renormalize away roundoff

    const double next = mixture_nll(A, w);
    result.nll_trace.push_back(next);
    if (nll - next < opts.tol) {
      result.converged = true;
      nll = next;
      break;
    }
    nll = next;
  }

  result.pmf = MixingPMF(grid, w);
  return result;
}

namespace {

// Linear-interpolated quantile of the (already increasing) grid points.
double grid_quantile(const Grid& grid, double frac) {
  const int m = grid.size();
  const double pos = frac * static_cast<double>(m - 1);
  const int lo = static_cast<int>(std::floor(pos));
  if (lo >= m - 1) return grid.at(m - 1);
  const double t = pos - lo;
  return grid.at(lo) * (1.0 - t) + grid.at(lo + 1) * t;
}

}  // namespace

SplineBasis spline_basis(const Grid& grid, int p) {
  if (grid.dim() != 1) throw input_error("spline_basis: univariate grids only");
  const int m = grid.size();
  if (p < 1 || p >= m)
    throw input_error("spline_basis: need 1 <= p < grid size");

  // p + 1 knots total: boundaries plus p - 1 interior quantiles.
  std::vector<double> knots(static_cast<std::size_t>(p) + 1);
  for (int k = 0; k <= p; ++k)
    knots[static_cast<std::size_t>(k)] =
        grid_quantile(grid, static_cast<double>(k) / static_cast<double>(p));
  for (std::size_t k = 0; k + 1 < knots.size(); ++k)
    if (!(knots[k] < knots[k + 1]))
      throw input_error("spline_basis: knots collapsed; reduce p");

  const int K = p + 1;
  const double xi_last = knots[static_cast<std::size_t>(K - 1)];
  const auto cube_pos = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const auto d_k = [&](int k, double x) {
    const double xi = knots[static_cast<std::size_t>(k)];
    return (cube_pos(x - xi) - cube_pos(x - xi_last)) / (xi_last - xi);
  };

  // Natural-spline functions beyond the constant: x, then the K - 2
  // difference terms d_k - d_{K-2}.
  Eigen::MatrixXd Q(m, p);
  for (int i = 0; i < m; ++i) {
    const double x = grid.at(i);
    Q(i, 0) = x;
    for (int k = 0; k + 2 < K; ++k) Q(i, k + 1) = d_k(k, x) - d_k(K - 2, x);
  }
  Q.rowwise() -= Q.colwise().mean();

  return SplineBasis{std::move(Q), p, std::move(knots)};
}

MixingPMF efron_pmf(const Grid& grid, const SplineBasis& basis,
                    const Eigen::VectorXd& alpha) {
  if (basis.Q.rows() != grid.size() || basis.Q.cols() != alpha.size())
    throw input_error("efron_pmf: shape mismatch");
  if (!alpha.allFinite()) throw input_error("efron_pmf: alpha must be finite");
  return MixingPMF(grid, softmax(basis.Q * alpha));
}

namespace {

struct EfronObjective {
  const Eigen::MatrixXd& A;
  const Eigen::MatrixXd& Q;
  double lambda;

  double value(const Eigen::VectorXd& alpha) const {
    const Eigen::VectorXd pi = softmax(Q * alpha);
    double loglik = 0.0;
    for (int i = 0; i < A.rows(); ++i) {
      const double r = mixture_row_dot(A, i, pi);
      if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
      loglik += std::log(r);
    }
    return loglik - lambda * alpha.norm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& alpha) const {
    const Eigen::VectorXd pi = softmax(Q * alpha);
    const Eigen::VectorXd r_inv = (A * pi).cwiseInverse();
    const Eigen::VectorXd deta =
        pi.cwiseProduct(A.transpose() * r_inv) - static_cast<double>(A.rows()) * pi;
    Eigen::VectorXd g = Q.transpose() * deta;
    const double norm = alpha.norm();
    if (norm > 0.0) g -= (lambda / norm) * alpha;
    return g;
  }
};

}  // namespace

EfronResult efron_fit(const KernelMatrix& F, const Grid& grid,
                      const SplineBasis& basis, double lambda,
                      const EfronOptions& opts) {
  if (lambda < 0.0) throw input_error("efron_fit: lambda must be >= 0");
  if (basis.Q.rows() != grid.size())
    throw input_error("efron_fit: basis does not match grid");
  if (F.cols() != grid.size())
    throw input_error("efron_fit: kernel matrix does not match grid");

  const EfronObjective obj{F.values(), basis.Q, lambda};
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(basis.df);
  double value = obj.value(alpha);

  EfronResult result{efron_pmf(grid, basis, alpha), {alpha, lambda}, {value}, false};

  double step = 1.0 / static_cast<double>(F.rows());
  for (long it = 0; it < opts.max_iters; ++it) {
    const Eigen::VectorXd g = obj.gradient(alpha);
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      result.converged = true;
      break;
    }

    // Armijo backtracking along the gradient; stalled search means no
    // ascent direction at this resolution, which we also call converged.
    const double slope = g.squaredNorm();
    double s = step;
    bool accepted = false;
    while (s > 1e-16) {
      const Eigen::VectorXd cand = alpha + s * g;
      const double cand_value = obj.value(cand);
      if (cand_value >= value + 1e-4 * s * slope) {
        alpha = cand;
        value = cand_value;
        step = 2.0 * s;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    result.objective_trace.push_back(value);
    if (!accepted) {
      result.converged = true;
      break;
    }
  }

  result.pmf = efron_pmf(grid, basis, alpha);
  result.params = {alpha, lambda};
  return result;
}

}  // namespace mixdens

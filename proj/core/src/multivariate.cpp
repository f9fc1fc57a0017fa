#include "mixdens/multivariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mixdens/errors.hpp"
#include "mixdens/rng.hpp"

namespace mixdens {

namespace {

constexpr double kVarianceFloor = 1e-6;

Eigen::MatrixXd conditional_mles(const Eigen::MatrixXd& pairs) {
  if (pairs.cols() != 2 || pairs.rows() < 1)
    throw input_error("select_grid_bivariate: need n x 2 paired responses");
  Eigen::MatrixXd mle(pairs.rows(), 2);
  for (int i = 0; i < pairs.rows(); ++i) {
    const double d = pairs(i, 0) - pairs(i, 1);
    mle(i, 0) = 0.5 * (pairs(i, 0) + pairs(i, 1));
    mle(i, 1) = std::max(0.5 * d * d, kVarianceFloor);
  }
  return mle;
}

// Lloyd iterations with k-means++ seeding over canonically sorted rows.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& pts, int m, Rng& rng) {
  const int n = static_cast<int>(pts.rows());

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pts(a, 0) != pts(b, 0)) return pts(a, 0) < pts(b, 0);
    return pts(a, 1) < pts(b, 1);
  });
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) x.row(i) = pts.row(order[static_cast<std::size_t>(i)]);

  Eigen::MatrixXd centers(m, 2);
  Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  centers.row(0) = x.row(static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n))));
  for (int k = 1; k < m; ++k) {
    for (int i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (x.row(i) - centers.row(k - 1)).squaredNorm());
    const double total = dist2.sum();
    if (total <= 0.0) {
      // Every remaining point already coincides with a center.
      for (int kk = k; kk < m; ++kk) centers.row(kk) = centers.row(0);
      break;
    }
    double u = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      u -= dist2[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.row(k) = x.row(pick);
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (x.row(i) - centers.row(0)).squaredNorm();
      for (int k = 1; k < m; ++k) {
        const double d = (x.row(i) - centers.row(k)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, 2);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      counts[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int k = 0; k < m; ++k) {
      if (counts[k] > 0.0) {
        centers.row(k) = sums.row(k) / counts[k];
      } else {
        // Re-seed an empty cluster at the point farthest from its center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (x.row(i) - centers.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(k) = x.row(far);
        assign[static_cast<std::size_t>(far)] = k;
      }
    }
  }
  return centers;
}

}  // namespace

GridSelection select_grid_bivariate(const Eigen::MatrixXd& pairs, int m,
                                    std::uint64_t seed) {
  const Eigen::MatrixXd mle = conditional_mles(pairs);
  const int n = static_cast<int>(mle.rows());
  if (m < 1 || m > n)
    throw input_error("select_grid_bivariate: need 1 <= m <= n");

  Eigen::MatrixXd z(n, 2);
  z.col(0) = mle.col(0);
  z.col(1) = mle.col(1).array().log();

  Eigen::Vector2d center = z.colwise().mean().transpose();
  Eigen::Vector2d scale;
  for (int c = 0; c < 2; ++c) {
    const double var = (z.col(c).array() - center[c]).square().sum() /
                       std::max(1, n - 1);
    scale[c] = std::sqrt(var);
    if (!(scale[c] > 0.0)) scale[c] = 1.0;
    z.col(c) = (z.col(c).array() - center[c]) / scale[c];
  }

  bool degenerate = true;
  for (int i = 1; i < n && degenerate; ++i)
    degenerate = (z.row(i) - z.row(0)).squaredNorm() == 0.0;

  Eigen::MatrixXd centers;
  if (degenerate) {
    centers = z.row(0);
  } else {
    Rng rng(seed);
    centers = kmeans(z, m, rng);
  }

  Eigen::MatrixXd mapped(centers.rows(), 2);
  for (int k = 0; k < centers.rows(); ++k) {
    mapped(k, 0) = centers(k, 0) * scale[0] + center[0];
    mapped(k, 1) =
        std::max(std::exp(centers(k, 1) * scale[1] + center[1]), kVarianceFloor);
  }

  // Collapse bit-identical support points; duplicated k-means centers and the
  // variance floor can both produce them on small or extreme data.
  std::vector<int> keep;
  for (int k = 0; k < mapped.rows(); ++k) {
    bool dup = false;
    for (int j : keep) {
      if (mapped(k, 0) == mapped(j, 0) && mapped(k, 1) == mapped(j, 1)) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(k);
  }
  Eigen::MatrixXd support(static_cast<int>(keep.size()), 2);
  for (std::size_t k = 0; k < keep.size(); ++k)
    support.row(static_cast<int>(k)) = mapped.row(keep[k]);

  return GridSelection{Grid(std::move(support)), center, scale, degenerate};
}

Eigen::Vector2d standardize_point(const GridSelection& selection, double mu,
                                  double s2) {
  if (!(s2 > 0.0)) throw input_error("standardize_point: s2 must be positive");
  return {(mu - selection.center[0]) / selection.scale[0],
          (std::log(s2) - selection.center[1]) / selection.scale[1]};
}

TrainResult fit_multivariate_neural_g(const Eigen::MatrixXd& pairs,
                                      const Grid& grid,
                                      const MlpArchitecture& arch,
                                      const TrainConfig& cfg) {
  if (grid.dim() != 2 || arch.input_dim != 2)
    throw input_error("fit_multivariate_neural_g: bivariate grids only");
  const KernelSpec kernel = KernelSpec::normal_location_scale();
  const KernelMatrix F = build_kernel_matrix(kernel, pairs, grid);

  // Standardized (mu, log s2) network inputs, one column per support point.
  Eigen::MatrixXd inputs(2, grid.size());
  inputs.row(0) = grid.points().col(0).transpose();
  inputs.row(1) = grid.points().col(1).array().log().transpose();
  for (int c = 0; c < 2; ++c) {
    const double mean = inputs.row(c).mean();
    double var = (inputs.row(c).array() - mean).square().sum() /
                 std::max(1, grid.size() - 1);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    inputs.row(c) = (inputs.row(c).array() - mean) / sd;
  }

  return train_core(F, inputs, grid, arch, cfg);
}

}  // namespace mixdens

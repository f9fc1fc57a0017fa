#include "mixdens/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mixdens/errors.hpp"

namespace mixdens {

namespace {

void check_no_duplicate_rows(const Eigen::MatrixXd& pts) {
  // Exact bit equality: sort row indices lexicographically, compare neighbors.
  const int m = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int k = 0; k < d; ++k) {
      if (pts(a, k) != pts(b, k)) return pts(a, k) < pts(b, k);
    }
    return false;
  });
  for (int i = 0; i + 1 < m; ++i) {
    bool equal = true;
    for (int k = 0; k < d; ++k) {
      if (pts(order[i], k) != pts(order[i + 1], k)) {
        equal = false;
        break;
      }
    }
    if (equal) throw input_error("Grid: duplicate support points");
  }
}

}  // namespace

Grid::Grid(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() == 0 || points_.cols() == 0)
    throw input_error("Grid: must hold at least one point");
  if (!points_.allFinite())
    throw input_error("Grid: all coordinates must be finite");
  if (points_.cols() == 1) {
    for (int j = 0; j + 1 < points_.rows(); ++j) {
      if (!(points_(j, 0) < points_(j + 1, 0)))
        throw input_error("Grid: univariate points must be strictly increasing");
    }
  } else {
    check_no_duplicate_rows(points_);
  }
}

Grid Grid::from_points(std::span<const double> points) {
  Eigen::MatrixXd pts(points.size(), 1);
  for (std::size_t j = 0; j < points.size(); ++j) pts(static_cast<int>(j), 0) = points[j];
  return Grid(std::move(pts));
}

Grid Grid::equispaced(double lo, double hi, int m) {
  if (m < 2) throw input_error("Grid::equispaced: need at least two points");
  if (!(lo < hi)) throw input_error("Grid::equispaced: lo must be below hi");
  Eigen::MatrixXd pts(m, 1);
  const double step = (hi - lo) / static_cast<double>(m - 1);
  for (int j = 0; j < m; ++j) pts(j, 0) = lo + step * j;
  pts(m - 1, 0) = hi;
  return Grid(std::move(pts));
}

double Grid::at(int j) const {
  if (dim() != 1) throw input_error("Grid::at: univariate grids only");
  return points_(j, 0);
}

std::vector<double> Grid::as_vector() const {
  if (dim() != 1) throw input_error("Grid::as_vector: univariate grids only");
  std::vector<double> out(static_cast<std::size_t>(size()));
  for (int j = 0; j < size(); ++j) out[static_cast<std::size_t>(j)] = points_(j, 0);
  return out;
}

MixingPMF::MixingPMF(Grid grid, Eigen::VectorXd weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
  if (weights_.size() != grid_.size())
    throw input_error("MixingPMF: weight count must match grid size");
  double sum = 0.0;
  for (int j = 0; j < weights_.size(); ++j) {
    const double w = weights_[j];
    if (!std::isfinite(w) || w < 0.0)
      throw input_error("MixingPMF: weights must be finite and nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kPmfSumTolerance)
    throw input_error("MixingPMF: weights must sum to one");
}

MixingPMF MixingPMF::uniform(Grid grid) {
  const int m = grid.size();
  return MixingPMF(std::move(grid),
                   Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
}

Eigen::VectorXd MixingPMF::mean() const {
  return grid_.points().transpose() * weights_;
}

}  // namespace mixdens

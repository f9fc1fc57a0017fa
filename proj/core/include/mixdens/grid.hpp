#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace mixdens {

/// Ordered finite support on which every estimated prior lives.
///
/// Rows of `points()` are support locations, one d-tuple per row. Univariate
/// grids must be strictly increasing; points are compared by exact bit
/// equality since grids are constructed, never measured.
class Grid {
 public:
  explicit Grid(Eigen::MatrixXd points);

  static Grid from_points(std::span<const double> points);
  static Grid equispaced(double lo, double hi, int m);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }

  /// Univariate accessor; throws for d > 1.
  double at(int j) const;
  Eigen::RowVectorXd row(int j) const { return points_.row(j); }

  /// Univariate support as a contiguous vector; throws for d > 1.
  std::vector<double> as_vector() const;

 private:
  Eigen::MatrixXd points_;  // m x d
};

/// A probability mass function over a Grid: nonnegative weights summing to
/// one (within 1e-10). The object every estimator in this library returns.
class MixingPMF {
 public:
  MixingPMF(Grid grid, Eigen::VectorXd weights);

  static MixingPMF uniform(Grid grid);

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.size()); }

  /// Mean of the PMF per coordinate.
  Eigen::VectorXd mean() const;

 private:
  Grid grid_;
  Eigen::VectorXd weights_;
};

inline constexpr double kPmfSumTolerance = 1e-10;

}  // namespace mixdens

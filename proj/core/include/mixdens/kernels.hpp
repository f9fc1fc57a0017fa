#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "mixdens/grid.hpp"

namespace mixdens {

enum class KernelFamily {
  NormalLocation,      // y | theta ~ N(theta, sigma^2), sigma fixed
  Poisson,             // y | theta ~ Poisson(theta)
  LogNormal,           // log y | theta ~ N(theta, sigma^2), sigma fixed
  NormalLocationScale  // (y1, y2) | (mu, s2) ~ iid N(mu, s2)
};

/// A known conditional density family with its fixed nuisance parameters.
class KernelSpec {
 public:
  static KernelSpec normal_location(double sigma);
  static KernelSpec poisson();
  static KernelSpec log_normal(double sigma);
  static KernelSpec normal_location_scale();

  KernelFamily family() const { return family_; }
  double sigma() const { return sigma_; }

  /// Components per observation (2 for the paired location-scale family).
  int obs_dim() const;
  /// Components per support point (2 for the location-scale family).
  int theta_dim() const;

  std::string name() const;

 private:
  KernelSpec(KernelFamily family, double sigma);
  KernelFamily family_;
  double sigma_;
};

/// log f(y | theta). Evaluated in the log domain throughout so extreme
/// observation/support pairs underflow gracefully instead of rounding the
/// likelihood to zero too early.
double kernel_log_density(const KernelSpec& spec, std::span<const double> y,
                          std::span<const double> theta);

double kernel_density(const KernelSpec& spec, std::span<const double> y,
                      std::span<const double> theta);
double kernel_density(const KernelSpec& spec, double y, double theta);

/// n x m evaluation of the kernel on data x grid; values(i, j) = f(y_i | theta_j).
/// Rows index observations, columns index support points. Every row must
/// contain a strictly positive entry, otherwise the mixture likelihood is
/// undefined for that observation.
class KernelMatrix {
 public:
  explicit KernelMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }

 private:
  Eigen::MatrixXd values_;
};

KernelMatrix build_kernel_matrix(const KernelSpec& spec,
                                 const Eigen::MatrixXd& data, const Grid& grid);
KernelMatrix build_kernel_matrix(const KernelSpec& spec,
                                 std::span<const double> data, const Grid& grid);

}  // namespace mixdens

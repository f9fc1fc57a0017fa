#include "mixdens/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mixdens/errors.hpp"

namespace mixdens {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

bool is_count(double y) {
  return y >= 0.0 && std::isfinite(y) &&
         std::abs(y - std::nearbyint(y)) < 1e-9;
}

double normal_log_pdf(double y, double mean, double sigma) {
  const double z = (y - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * kLogTwoPi;
}

}  // namespace

KernelSpec::KernelSpec(KernelFamily family, double sigma)
    : family_(family), sigma_(sigma) {
  if ((family == KernelFamily::NormalLocation ||
       family == KernelFamily::LogNormal) &&
      !(sigma > 0.0 && std::isfinite(sigma)))
    throw input_error("KernelSpec: fixed scale must be strictly positive");
}

KernelSpec KernelSpec::normal_location(double sigma) {
  return KernelSpec(KernelFamily::NormalLocation, sigma);
}
KernelSpec KernelSpec::poisson() {
  return KernelSpec(KernelFamily::Poisson, 0.0);
}
KernelSpec KernelSpec::log_normal(double sigma) {
  return KernelSpec(KernelFamily::LogNormal, sigma);
}
KernelSpec KernelSpec::normal_location_scale() {
  return KernelSpec(KernelFamily::NormalLocationScale, 0.0);
}

int KernelSpec::obs_dim() const {
  return family_ == KernelFamily::NormalLocationScale ? 2 : 1;
}

int KernelSpec::theta_dim() const {
  return family_ == KernelFamily::NormalLocationScale ? 2 : 1;
}

std::string KernelSpec::name() const {
  switch (family_) {
    case KernelFamily::NormalLocation: return "normal";
    case KernelFamily::Poisson: return "poisson";
    case KernelFamily::LogNormal: return "lognormal";
    case KernelFamily::NormalLocationScale: return "normal-location-scale";
  }
  return "unknown";
}

double kernel_log_density(const KernelSpec& spec, std::span<const double> y,
                          std::span<const double> theta) {
  if (static_cast<int>(y.size()) != spec.obs_dim() ||
      static_cast<int>(theta.size()) != spec.theta_dim())
    throw input_error("kernel_log_density: dimension mismatch");

  switch (spec.family()) {
    case KernelFamily::NormalLocation:
      return normal_log_pdf(y[0], theta[0], spec.sigma());

    case KernelFamily::Poisson: {
      if (!is_count(y[0]))
        throw input_error("kernel_log_density: Poisson observations must be "
                          "nonnegative integers");
      if (!(theta[0] > 0.0))
        throw input_error("kernel_log_density: Poisson rate must be positive");
      const double k = std::nearbyint(y[0]);
      return k * std::log(theta[0]) - theta[0] - std::lgamma(k + 1.0);
    }

    case KernelFamily::LogNormal: {
      if (!(y[0] > 0.0))
        throw input_error("kernel_log_density: log-normal observations must "
                          "be positive");
      const double z = (std::log(y[0]) - theta[0]) / spec.sigma();
      return -0.5 * z * z - std::log(y[0] * spec.sigma()) - 0.5 * kLogTwoPi;
    }

    case KernelFamily::NormalLocationScale: {
      const double s2 = theta[1];
      if (!(s2 > 0.0))
        throw input_error("kernel_log_density: variance coordinate must be "
                          "positive");
      const double d1 = y[0] - theta[0];
      const double d2 = y[1] - theta[0];
      return -0.5 * (d1 * d1 + d2 * d2) / s2 - std::log(s2) - kLogTwoPi;
    }
  }
  throw input_error("kernel_log_density: unknown family");
}

double kernel_density(const KernelSpec& spec, std::span<const double> y,
                      std::span<const double> theta) {
  return std::exp(kernel_log_density(spec, y, theta));
}

double kernel_density(const KernelSpec& spec, double y, double theta) {
  return kernel_density(spec, std::span<const double>(&y, 1),
                        std::span<const double>(&theta, 1));
}

KernelMatrix::KernelMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0)
    throw input_error("KernelMatrix: must be nonempty");
  for (int i = 0; i < values_.rows(); ++i) {
    bool any_positive = false;
    for (int j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw input_error("KernelMatrix: entries must be finite and nonnegative");
      any_positive |= v > 0.0;
    }
    if (!any_positive)
      throw data_error("KernelMatrix: observation " + std::to_string(i) +
                       " has zero density at every support point");
  }
}

KernelMatrix build_kernel_matrix(const KernelSpec& spec,
                                 const Eigen::MatrixXd& data, const Grid& grid) {
  if (grid.dim() != spec.theta_dim())
    throw input_error("build_kernel_matrix: grid dimension does not match kernel");
  if (static_cast<int>(data.cols()) != spec.obs_dim())
    throw input_error("build_kernel_matrix: data dimension does not match kernel");
  if (data.rows() == 0) throw input_error("build_kernel_matrix: empty data");

  const int n = static_cast<int>(data.rows());
  const int m = grid.size();
  Eigen::MatrixXd values(n, m);
  std::vector<double> yi(static_cast<std::size_t>(spec.obs_dim()));
  std::vector<double> tj(static_cast<std::size_t>(spec.theta_dim()));
  try {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < spec.obs_dim(); ++c) yi[static_cast<std::size_t>(c)] = data(i, c);
      for (int j = 0; j < m; ++j) {
        for (int c = 0; c < spec.theta_dim(); ++c) tj[static_cast<std::size_t>(c)] = grid.points()(j, c);
        values(i, j) = std::exp(kernel_log_density(spec, yi, tj));
      }
    }
  } catch (const input_error& e) {
    // Domain violations discovered while scanning user data are data problems.
    throw data_error(e.what());
  }
  return KernelMatrix(std::move(values));
}

KernelMatrix build_kernel_matrix(const KernelSpec& spec,
                                 std::span<const double> data, const Grid& grid) {
  Eigen::MatrixXd mat(data.size(), 1);
  for (std::size_t i = 0; i < data.size(); ++i) mat(static_cast<int>(i), 0) = data[i];
  return build_kernel_matrix(spec, mat, grid);
}

}  // namespace mixdens

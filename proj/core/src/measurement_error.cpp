#include "mixdens/measurement_error.hpp"

#include <cmath>

#include "mixdens/errors.hpp"
#include "mixdens/simulate.hpp"

namespace mixdens {

double plug_in_sigma2(const Eigen::MatrixXd& pairs) {
  if (pairs.cols() != 2 || pairs.rows() < 2)
    throw input_error("plug_in_sigma2: need at least two response pairs");
  const Eigen::VectorXd diff = pairs.col(0) - pairs.col(1);
  const double mean = diff.mean();
  const double var = (diff.array() - mean).square().sum() /
                     static_cast<double>(diff.size() - 1);
  if (!(var > 0.0))
    throw data_error("plug_in_sigma2: within-pair differences have zero variance");
  return 0.5 * var;
}

HomogeneousFit fit_homogeneous(const Eigen::MatrixXd& pairs,
                               const std::optional<Grid>& grid,
                               const HomogeneousFitOptions& opts) {
  const double sigma2 = plug_in_sigma2(pairs);

  std::vector<double> averaged(static_cast<std::size_t>(pairs.rows()));
  for (int i = 0; i < pairs.rows(); ++i)
    averaged[static_cast<std::size_t>(i)] = 0.5 * (pairs(i, 0) + pairs(i, 1));

  const Grid support =
      grid ? *grid : default_grid(averaged, opts.grid_size);
  const KernelSpec kernel = KernelSpec::normal_location(std::sqrt(sigma2 / 2.0));

  switch (opts.estimator) {
    case EstimatorKind::NeuralG: {
      MlpArchitecture arch = opts.arch;
      arch.input_dim = 1;
      arch.output_dim = support.size();
      TrainResult fit = train_neural_g(averaged, kernel, support, arch, opts.train);
      return {std::move(fit.pmf), sigma2, support};
    }
    case EstimatorKind::Npmle: {
      const KernelMatrix F = build_kernel_matrix(kernel, averaged, support);
      NpmleResult fit = npmle_em(F, support, opts.npmle);
      return {std::move(fit.pmf), sigma2, support};
    }
    case EstimatorKind::Efron: {
      const KernelMatrix F = build_kernel_matrix(kernel, averaged, support);
      const SplineBasis basis = spline_basis(support, opts.efron_df);
      EfronResult fit = efron_fit(F, support, basis, opts.efron_lambda, opts.efron);
      return {std::move(fit.pmf), sigma2, support};
    }
  }
  throw input_error("fit_homogeneous: unknown estimator");
}

}  // namespace mixdens

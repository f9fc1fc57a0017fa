#include "mixdens/posterior.hpp"

#include <cmath>
#include <string>

#include "mixdens/errors.hpp"
#include "mixdens/likelihood.hpp"

namespace mixdens {

PosteriorPMF posterior_pmf(const KernelMatrix& F, const MixingPMF& prior) {
  if (F.cols() != prior.size())
    throw input_error("posterior_pmf: kernel matrix does not match prior");
  const auto& A = F.values();
  const int n = F.rows();
  const int m = F.cols();

  Eigen::MatrixXd post(n, m);
  for (int i = 0; i < n; ++i) {
    const double norm = mixture_row_dot(A, i, prior.weights());
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw numeric_error("posterior_pmf: observation " + std::to_string(i) +
                          " has zero marginal density under this prior");
    for (int j = 0; j < m; ++j)
      post(i, j) = A(i, j) * prior.weights()[j] / norm;
  }
  return PosteriorPMF{prior.grid(), std::move(post)};
}

Eigen::MatrixXd posterior_mean(const PosteriorPMF& post) {
  return post.weights * post.grid.points();
}

std::vector<CredibleInterval> credible_interval(const PosteriorPMF& post,
                                                double level) {
  if (post.grid.dim() != 1)
    throw input_error("credible_interval: univariate grids only");
  if (!(level > 0.0) || level > 1.0)
    throw input_error("credible_interval: level must lie in (0, 1]");

  // Tiny slack so cumulative roundoff cannot push a quantile past the last
  // point that carries mass (matters at level = 1).
  constexpr double kCdfSlack = 1e-12;
  const double q_lo = (1.0 - level) / 2.0;
  const double q_hi = 1.0 - q_lo - kCdfSlack;
  const int n = static_cast<int>(post.weights.rows());
  const int m = post.grid.size();

  std::vector<CredibleInterval> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double cdf = 0.0;
    int lo_idx = m - 1;
    int hi_idx = m - 1;
    bool lo_found = false;
    for (int j = 0; j < m; ++j) {
      cdf += post.weights(i, j);
      // At q = 0 the quantile is the first point carrying any mass.
      const bool lo_hit =
          q_lo > 0.0 ? cdf >= q_lo : post.weights(i, j) > 0.0;
      if (!lo_found && lo_hit) {
        lo_idx = j;
        lo_found = true;
      }
      if (cdf >= q_hi) {
        hi_idx = j;
        break;
      }
    }
    out.push_back({post.grid.at(lo_idx), post.grid.at(hi_idx)});
  }
  return out;
}

double empirical_coverage(std::span<const double> true_thetas,
                          std::span<const CredibleInterval> intervals) {
  if (true_thetas.size() != intervals.size())
    throw input_error("empirical_coverage: length mismatch");
  if (true_thetas.empty())
    throw input_error("empirical_coverage: empty input");
  long covered = 0;
  for (std::size_t i = 0; i < true_thetas.size(); ++i) {
    if (intervals[i].lo <= true_thetas[i] && true_thetas[i] <= intervals[i].hi)
      ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(true_thetas.size());
}

}  // namespace mixdens

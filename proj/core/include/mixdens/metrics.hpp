#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"

namespace mixdens {

/// Ground-truth prior used for scoring: either an analytic univariate family
/// with evaluable pdf/cdf/quantile, or an exact atom list.
class TruePrior {
 public:
  static TruePrior uniform(double lo, double hi);
  /// Piecewise-constant density: probs[k] of mass spread evenly over
  /// [breaks[k], breaks[k + 1]).
  static TruePrior piecewise(std::vector<double> breaks, std::vector<double> probs);
  static TruePrior gumbel(double loc, double scale);
  static TruePrior beta(double a, double b);
  static TruePrior gaussian(double mean, double sd);
  static TruePrior atoms(std::vector<double> points, std::vector<double> probs);
  static TruePrior from_pmf(const MixingPMF& pmf);

  bool is_atomic() const { return atomic_; }
  double cdf(double x) const;
  double pdf(double x) const;  // density; throws for atom lists
  double quantile(double q) const;
  /// [quantile(tail), quantile(1 - tail)]; exact bounds for atom lists.
  std::pair<double, double> support(double tail = 1e-9) const;

  const std::vector<double>& atom_points() const;
  const std::vector<double>& atom_probs() const;

 private:
  TruePrior() = default;
  enum class Family { Uniform, Piecewise, Gumbel, Beta, Gaussian, Atoms };
  Family family_ = Family::Uniform;
  bool atomic_ = false;
  double a_ = 0.0, b_ = 1.0;          // family parameters
  std::vector<double> breaks_, probs_;  // piecewise / atoms
};

struct W1Options {
  int grid_points = 2001;  // integration grid resolution
  double pad = 1.0;        // widening beyond the union of supports
};

struct W1Result {
  double value;
  double cell_width;
};

/// Integrated absolute CDF gap, computed as a left-Riemann sum over a
/// uniform integration grid spanning both supports. The estimate's CDF is
/// the right-continuous step function of its PMF.
W1Result w1_distance(const MixingPMF& est, const TruePrior& truth,
                     const W1Options& opts = {});
W1Result w1_distance(const MixingPMF& est, const MixingPMF& reference,
                     const W1Options& opts = {});

/// Posterior expectations under the exact prior: finite sums for atom lists,
/// Simpson quadrature on a 10,001-point grid otherwise. The quadrature range
/// starts at the prior support widened by six kernel scales and doubles the
/// widening until it captures all but 1e-8 of the prior mass.
std::vector<double> true_posterior_means(const TruePrior& truth,
                                         const KernelSpec& spec,
                                         std::span<const double> data);

/// Mean absolute difference between estimated and true posterior means.
double bayes_mae(std::span<const double> estimated, std::span<const double> truth);

/// Count histogram keyed by observed value.
std::map<long, long> count_histogram(std::span<const double> data);

/// Sum over observed count values of |O_c - n_k * sum_j f(c | theta_j) w_j|.
/// An L1 discrepancy between observed and fitted count frequencies.
double chi2_mae(const std::map<long, long>& observed, const MixingPMF& est,
                const KernelSpec& spec, long n_k);

struct FoldPlan {
  int K = 0;
  std::vector<std::vector<int>> folds;
};

/// Seeded shuffle of 0..n-1 cut into K contiguous blocks with sizes
/// differing by at most one. K = 1 degenerates to fit-and-score-on-all.
FoldPlan make_fold_plan(int n, int K, std::uint64_t seed);

using EstimatorFn = std::function<MixingPMF(std::span<const double> train)>;

/// K-fold out-of-sample predictive log-likelihood:
///   (1/K) sum_k sum_{i held out in fold k} -2 log(sum_j f(y_i|theta_j) w_j)
/// with the weights fitted on the complement of fold k. Smaller is better.
double cv_pll(std::span<const double> data, const KernelSpec& spec,
              const Grid& grid, const EstimatorFn& estimator,
              const FoldPlan& plan);

struct CvScores {
  double pll = 0.0;
  std::optional<double> chi2_mae;  // count kernels only
};

/// One pass of per-fold fits scoring both CV metrics.
CvScores cv_scores(std::span<const double> data, const KernelSpec& spec,
                   const Grid& grid, const EstimatorFn& estimator,
                   const FoldPlan& plan);

/// Flat metrics document for serialization.
struct MetricsReport {
  std::optional<double> w1;
  std::optional<double> w1_cell_width;
  std::optional<double> mae;
  std::optional<double> chi2_mae;
  std::optional<double> pll;
  long n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  double elapsed_seconds = 0.0;
};

std::string metrics_to_json(const MetricsReport& report);

}  // namespace mixdens

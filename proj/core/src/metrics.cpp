#include "mixdens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include "mixdens/errors.hpp"
#include "mixdens/likelihood.hpp"
#include "mixdens/rng.hpp"

namespace mixdens {

TruePrior TruePrior::uniform(double lo, double hi) {
  if (!(lo < hi)) throw input_error("TruePrior::uniform: lo must be below hi");
  TruePrior p;
  p.family_ = Family::Uniform;
  p.a_ = lo;
  p.b_ = hi;
  return p;
}

TruePrior TruePrior::piecewise(std::vector<double> breaks,
                               std::vector<double> probs) {
  if (breaks.size() != probs.size() + 1 || probs.empty())
    throw input_error("TruePrior::piecewise: need one more break than segment");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(breaks[k] < breaks[k + 1]))
      throw input_error("TruePrior::piecewise: breaks must increase");
    if (probs[k] < 0.0) throw input_error("TruePrior::piecewise: negative mass");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw input_error("TruePrior::piecewise: segment masses must sum to one");
  TruePrior p;
  p.family_ = Family::Piecewise;
  p.breaks_ = std::move(breaks);
  p.probs_ = std::move(probs);
  return p;
}

TruePrior TruePrior::gumbel(double loc, double scale) {
  if (!(scale > 0.0)) throw input_error("TruePrior::gumbel: scale must be positive");
  TruePrior p;
  p.family_ = Family::Gumbel;
  p.a_ = loc;
  p.b_ = scale;
  return p;
}

TruePrior TruePrior::beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw input_error("TruePrior::beta: bad shape");
  TruePrior p;
  p.family_ = Family::Beta;
  p.a_ = a;
  p.b_ = b;
  return p;
}

TruePrior TruePrior::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw input_error("TruePrior::gaussian: sd must be positive");
  TruePrior p;
  p.family_ = Family::Gaussian;
  p.a_ = mean;
  p.b_ = sd;
  return p;
}

TruePrior TruePrior::atoms(std::vector<double> points, std::vector<double> probs) {
  if (points.size() != probs.size() || points.empty())
    throw input_error("TruePrior::atoms: shape mismatch");
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  TruePrior p;
  p.family_ = Family::Atoms;
  p.atomic_ = true;
  double total = 0.0;
  for (std::size_t i : order) {
    if (probs[i] < 0.0) throw input_error("TruePrior::atoms: negative mass");
    p.breaks_.push_back(points[i]);
    p.probs_.push_back(probs[i]);
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw input_error("TruePrior::atoms: masses must sum to one");
  return p;
}

TruePrior TruePrior::from_pmf(const MixingPMF& pmf) {
  if (pmf.grid().dim() != 1)
    throw input_error("TruePrior::from_pmf: univariate grids only");
  std::vector<double> pts = pmf.grid().as_vector();
  std::vector<double> probs(pmf.weights().data(),
                            pmf.weights().data() + pmf.weights().size());
  return atoms(std::move(pts), std::move(probs));
}

double TruePrior::cdf(double x) const {
  switch (family_) {
    case Family::Uniform:
      if (x <= a_) return 0.0;
      if (x >= b_) return 1.0;
      return (x - a_) / (b_ - a_);
    case Family::Piecewise: {
      double acc = 0.0;
      for (std::size_t k = 0; k < probs_.size(); ++k) {
        if (x >= breaks_[k + 1]) {
          acc += probs_[k];
        } else if (x > breaks_[k]) {
          acc += probs_[k] * (x - breaks_[k]) / (breaks_[k + 1] - breaks_[k]);
          break;
        } else {
          break;
        }
      }
      return acc;
    }
    case Family::Gumbel:
      return std::exp(-std::exp(-(x - a_) / b_));
    case Family::Beta: {
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return boost::math::cdf(boost::math::beta_distribution<double>(a_, b_), x);
    }
    case Family::Gaussian:
      return boost::math::cdf(boost::math::normal_distribution<double>(a_, b_), x);
    case Family::Atoms: {
      double acc = 0.0;
      for (std::size_t k = 0; k < breaks_.size() && breaks_[k] <= x; ++k)
        acc += probs_[k];
      return acc;
    }
  }
  throw input_error("TruePrior::cdf: unknown family");
}

double TruePrior::pdf(double x) const {
  switch (family_) {
    case Family::Uniform:
      return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
    case Family::Piecewise:
      for (std::size_t k = 0; k < probs_.size(); ++k) {
        if (x >= breaks_[k] && x < breaks_[k + 1])
          return probs_[k] / (breaks_[k + 1] - breaks_[k]);
      }
      return 0.0;
    case Family::Gumbel: {
      const double z = (x - a_) / b_;
      return std::exp(-z - std::exp(-z)) / b_;
    }
    case Family::Beta:
      if (x <= 0.0 || x >= 1.0) return 0.0;
      return boost::math::pdf(boost::math::beta_distribution<double>(a_, b_), x);
    case Family::Gaussian:
      return boost::math::pdf(boost::math::normal_distribution<double>(a_, b_), x);
    case Family::Atoms:
      throw input_error("TruePrior::pdf: atom lists have no density");
  }
  throw input_error("TruePrior::pdf: unknown family");
}

double TruePrior::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw input_error("TruePrior::quantile: bad level");
  switch (family_) {
    case Family::Uniform:
      return a_ + q * (b_ - a_);
    case Family::Piecewise: {
      if (q <= 0.0) return breaks_.front();
      double acc = 0.0;
      for (std::size_t k = 0; k < probs_.size(); ++k) {
        if (acc + probs_[k] >= q) {
          const double frac = probs_[k] > 0.0 ? (q - acc) / probs_[k] : 0.0;
          return breaks_[k] + frac * (breaks_[k + 1] - breaks_[k]);
        }
        acc += probs_[k];
      }
      return breaks_.back();
    }
    case Family::Gumbel: {
      const double qq = std::clamp(q, 1e-300, 1.0 - 1e-16);
      return a_ - b_ * std::log(-std::log(qq));
    }
    case Family::Beta:
      return boost::math::quantile(boost::math::beta_distribution<double>(a_, b_),
                                   std::clamp(q, 0.0, 1.0));
    case Family::Gaussian:
      return boost::math::quantile(
          boost::math::normal_distribution<double>(a_, b_),
          std::clamp(q, 1e-300, 1.0 - 1e-16));
    case Family::Atoms: {
      double acc = 0.0;
      for (std::size_t k = 0; k < breaks_.size(); ++k) {
        acc += probs_[k];
        if (acc >= q) return breaks_[k];
      }
      return breaks_.back();
    }
  }
  throw input_error("TruePrior::quantile: unknown family");
}

std::pair<double, double> TruePrior::support(double tail) const {
  if (atomic_) return {breaks_.front(), breaks_.back()};
  return {quantile(tail), quantile(1.0 - tail)};
}

const std::vector<double>& TruePrior::atom_points() const {
  if (!atomic_) throw input_error("TruePrior: not an atom list");
  return breaks_;
}

const std::vector<double>& TruePrior::atom_probs() const {
  if (!atomic_) throw input_error("TruePrior: not an atom list");
  return probs_;
}

namespace {

// Right-continuous step CDF of a univariate PMF.
double pmf_cdf(const MixingPMF& pmf, double x) {
  double acc = 0.0;
  for (int j = 0; j < pmf.size(); ++j) {
    if (pmf.grid().at(j) <= x)
      acc += pmf.weights()[j];
    else
      break;
  }
  return acc;
}

W1Result w1_between(const std::function<double(double)>& cdf_a,
                    const std::function<double(double)>& cdf_b, double lo,
                    double hi, const W1Options& opts) {
  if (opts.grid_points < 2) throw input_error("w1_distance: bad integration grid");
  const double a = lo - opts.pad;
  const double b = hi + opts.pad;
  const int cells = opts.grid_points - 1;
  const double width = (b - a) / static_cast<double>(cells);
  double acc = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double x = a + width * k;
    acc += std::abs(cdf_a(x) - cdf_b(x));
  }
  return {acc * width, width};
}

}  // namespace

W1Result w1_distance(const MixingPMF& est, const TruePrior& truth,
                     const W1Options& opts) {
  if (est.grid().dim() != 1) throw input_error("w1_distance: univariate grids only");
  const auto [tlo, thi] = truth.support();
  const double lo = std::min(tlo, est.grid().at(0));
  const double hi = std::max(thi, est.grid().at(est.size() - 1));
  return w1_between([&](double x) { return truth.cdf(x); },
                    [&](double x) { return pmf_cdf(est, x); }, lo, hi, opts);
}

W1Result w1_distance(const MixingPMF& est, const MixingPMF& reference,
                     const W1Options& opts) {
  if (est.grid().dim() != 1 || reference.grid().dim() != 1)
    throw input_error("w1_distance: univariate grids only");
  const double lo = std::min(est.grid().at(0), reference.grid().at(0));
  const double hi = std::max(est.grid().at(est.size() - 1),
                             reference.grid().at(reference.size() - 1));
  return w1_between([&](double x) { return pmf_cdf(est, x); },
                    [&](double x) { return pmf_cdf(reference, x); }, lo, hi,
                    opts);
}

namespace {

double kernel_scale(const KernelSpec& spec) {
  switch (spec.family()) {
    case KernelFamily::NormalLocation:
    case KernelFamily::LogNormal:
      return spec.sigma();
    default:
      return 1.0;
  }
}

// Simpson weights on a uniform grid with an even number of intervals.
double simpson_weight(int k, int last) {
  if (k == 0 || k == last) return 1.0;
  return (k % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace

std::vector<double> true_posterior_means(const TruePrior& truth,
                                         const KernelSpec& spec,
                                         std::span<const double> data) {
  if (spec.theta_dim() != 1)
    throw input_error("true_posterior_means: univariate kernels only");

  std::vector<double> means(data.size());

  if (truth.is_atomic()) {
    const auto& pts = truth.atom_points();
    const auto& probs = truth.atom_probs();
    for (std::size_t i = 0; i < data.size(); ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double f = kernel_density(spec, data[i], pts[k]) * probs[k];
        num += pts[k] * f;
        den += f;
      }
      if (!(den > 0.0))
        throw numeric_error("true_posterior_means: zero marginal density");
      means[i] = num / den;
    }
    return means;
  }

  constexpr int kPoints = 10001;
  constexpr double kMassTarget = 1.0 - 1e-8;
  double widen = 6.0 * kernel_scale(spec);
  auto [s_lo, s_hi] = truth.support();

  for (int attempt = 0;; ++attempt) {
    const double lo = s_lo - widen;
    const double hi = s_hi + widen;
    const double h = (hi - lo) / static_cast<double>(kPoints - 1);

    // One pass establishes how much prior mass the range captures.
    double mass = 0.0;
    for (int k = 0; k < kPoints; ++k)
      mass += simpson_weight(k, kPoints - 1) * truth.pdf(lo + h * k);
    mass *= h / 3.0;
    if (mass >= kMassTarget) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (int k = 0; k < kPoints; ++k) {
          const double theta = lo + h * k;
          const double w = simpson_weight(k, kPoints - 1) * truth.pdf(theta);
          if (w == 0.0) continue;
          const double f = w * kernel_density(spec, data[i], theta);
          num += theta * f;
          den += f;
        }
        if (!(den > 0.0))
          throw numeric_error("true_posterior_means: zero marginal density");
        means[i] = num / den;
      }
      return means;
    }
    if (attempt >= 20)
      throw numeric_error(
          "true_posterior_means: could not capture the prior mass");
    widen = std::max(2.0 * widen, 1.0);
  }
}

double bayes_mae(std::span<const double> estimated, std::span<const double> truth) {
  if (estimated.size() != truth.size() || estimated.empty())
    throw input_error("bayes_mae: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i)
    acc += std::abs(estimated[i] - truth[i]);
  return acc / static_cast<double>(estimated.size());
}

std::map<long, long> count_histogram(std::span<const double> data) {
  std::map<long, long> hist;
  for (double y : data) {
    if (!(y >= 0.0) || std::abs(y - std::nearbyint(y)) > 1e-9)
      throw input_error("count_histogram: data must be nonnegative integers");
    hist[static_cast<long>(std::nearbyint(y))] += 1;
  }
  return hist;
}

double chi2_mae(const std::map<long, long>& observed, const MixingPMF& est,
                const KernelSpec& spec, long n_k) {
  if (spec.family() != KernelFamily::Poisson)
    throw input_error("chi2_mae: count kernels only");
  if (n_k < 1) throw input_error("chi2_mae: n_k must be positive");
  double acc = 0.0;
  for (const auto& [c, o] : observed) {
    double fitted = 0.0;
    for (int j = 0; j < est.size(); ++j)
      fitted += kernel_density(spec, static_cast<double>(c), est.grid().at(j)) *
                est.weights()[j];
    acc += std::abs(static_cast<double>(o) - static_cast<double>(n_k) * fitted);
  }
  return acc;
}

FoldPlan make_fold_plan(int n, int K, std::uint64_t seed) {
  if (K < 1 || K > n) throw input_error("make_fold_plan: need 1 <= K <= n");
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  FoldPlan plan;
  plan.K = K;
  plan.folds.resize(static_cast<std::size_t>(K));
  // Block sizes n/K with the first n%K blocks one larger.
  int offset = 0;
  for (int k = 0; k < K; ++k) {
    const int size = n / K + (k < n % K ? 1 : 0);
    plan.folds[static_cast<std::size_t>(k)]
        .assign(perm.begin() + offset, perm.begin() + offset + size);
    offset += size;
  }
  return plan;
}

CvScores cv_scores(std::span<const double> data, const KernelSpec& spec,
                   const Grid& grid, const EstimatorFn& estimator,
                   const FoldPlan& plan) {
  const int n = static_cast<int>(data.size());
  if (plan.K < 1) throw input_error("cv_scores: empty fold plan");
  const bool counts = spec.family() == KernelFamily::Poisson;

  double pll = 0.0;
  double chi2 = 0.0;
  for (const auto& fold : plan.folds) {
    std::vector<double> train;
    train.reserve(static_cast<std::size_t>(n));
    std::vector<char> held(static_cast<std::size_t>(n), 0);
    for (int i : fold) held[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n; ++i)
      if (!held[static_cast<std::size_t>(i)]) train.push_back(data[static_cast<std::size_t>(i)]);
    // A single degenerate fold scores the fit of the whole dataset.
    if (train.empty()) train.assign(data.begin(), data.end());

    const MixingPMF fit = estimator(train);

    for (int i : fold) {
      double density = 0.0;
      for (int j = 0; j < grid.size(); ++j)
        density += kernel_density(spec, data[static_cast<std::size_t>(i)],
                                  grid.at(j)) *
                   fit.weights()[j];
      if (!(density > 0.0) || !std::isfinite(density))
        throw numeric_error("cv_scores: zero predictive density at observation " +
                            std::to_string(i));
      pll += -2.0 * std::log(density);
    }

    if (counts) {
      std::vector<double> held_values;
      held_values.reserve(fold.size());
      for (int i : fold) held_values.push_back(data[static_cast<std::size_t>(i)]);
      chi2 += chi2_mae(count_histogram(held_values), fit, spec,
                       static_cast<long>(fold.size()));
    }
  }

  CvScores scores;
  scores.pll = pll / static_cast<double>(plan.K);
  if (counts) scores.chi2_mae = chi2 / static_cast<double>(plan.K);
  return scores;
}

double cv_pll(std::span<const double> data, const KernelSpec& spec,
              const Grid& grid, const EstimatorFn& estimator,
              const FoldPlan& plan) {
  return cv_scores(data, spec, grid, estimator, plan).pll;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::json doc;
  const auto put = [&](const char* key, const std::optional<double>& v) {
    if (v)
      doc[key] = *v;
    else
      doc[key] = nullptr;
  };
  put("w1", report.w1);
  put("w1_cell_width", report.w1_cell_width);
  put("mae", report.mae);
  put("chi2_mae", report.chi2_mae);
  put("pll", report.pll);
  doc["n"] = report.n;
  doc["m"] = report.m;
  doc["seed"] = report.seed;
  doc["estimator"] = report.estimator;
  doc["elapsed_seconds"] = report.elapsed_seconds;
  return doc.dump(2);
}

}  // namespace mixdens

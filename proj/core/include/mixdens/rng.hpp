#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mixdens {

/// SplitMix64 finalizer; used as the seed-mixing primitive everywhere.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for replication stream `stream` under a master seed.
///
/// derive_seed(master, r) = splitmix64(master + (r + 1) * 0x9E3779B97F4A7C15).
/// Replication r of any experiment uses this and nothing else, so harnesses
/// can fan out work without coordinating generator state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seeded generator with portable variate transforms.
///
/// The engine is the 64-bit Mersenne twister; all transforms below are
/// written out explicitly (Box-Muller, inverse CDF, Marsaglia-Tsang) instead
/// of going through std:: distributions, whose draw sequences differ between
/// standard libraries. Same seed, same platform-independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n);

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform double in (0, 1]; safe to pass through log().
  double uniform_pos();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Max-Gumbel: loc - scale * log(-log U).
  double gumbel(double loc, double scale);

  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; requires shape >= 1.
  double gamma(double shape);
  double beta(double a, double b);
  /// scale / Gamma(shape, 1).
  double inverse_gamma(double shape, double scale);

  /// Poisson count by sequential inversion; large means split recursively
  /// so the pmf terms never underflow.
  long poisson(double lambda);

  /// Index drawn proportional to the given nonnegative weights.
  std::size_t categorical(std::span<const double> weights);

  /// Fisher-Yates with this engine (std::shuffle draws are not portable).
  void shuffle(std::vector<int>& values);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mixdens

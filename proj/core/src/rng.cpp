#include "mixdens/rng.hpp"

#include <cmath>
#include <numbers>

#include "mixdens/errors.hpp"

namespace mixdens {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t Rng::bounded(std::uint64_t n) {
  if (n == 0) throw input_error("Rng::bounded: n must be positive");
  const std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() { return 1.0 - uniform(); }

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gumbel(double loc, double scale) {
  return loc - scale * std::log(-std::log(uniform_pos()));
}

double Rng::gamma(double shape) {
  if (shape < 1.0) throw input_error("Rng::gamma: shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

double Rng::inverse_gamma(double shape, double scale) {
  return scale / gamma(shape);
}

long Rng::poisson(double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw input_error("Rng::poisson: lambda must be finite and nonnegative");
  if (lambda == 0.0) return 0;
  if (lambda > 30.0) {
    const double half = 0.5 * lambda;
    return poisson(half) + poisson(lambda - half);
  }
  const double u = uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  long k = 0;
  while (u >= cdf && k < 10000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw input_error("Rng::categorical: weights must be nonnegative");
    total += w;
  }
  if (total <= 0.0)
    throw input_error("Rng::categorical: weights must not all be zero");
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
    acc += weights[j];
    if (u < acc) return j;
  }
  return weights.size() - 1;
}

void Rng::shuffle(std::vector<int>& values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = bounded(i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace mixdens

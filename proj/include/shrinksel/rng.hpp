#pragma once

#include <cstdint>
#include <random>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace shrinksel {

/// Stream tags for seed derivation. All randomness in a run flows from one
/// master seed: derive_seed(master, tag, index) picks the stream for a
/// (command, replicate, chain) triple.
enum class Stream : std::uint64_t {
  Design = 1,
  Response = 2,
  Chain = 3,
  Oracle = 4,
};

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of sub-stream (tag, index) under `master`. Distinct inputs give
/// statistically independent mt19937_64 streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream tag, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(tag)) + index);
}

/// MT19937-64 engine with boost.random distributions, which, unlike the
/// std:: ones, produce the same variates on every standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return boost::random::uniform_01<double>{}(engine_); }
  double normal() { return normal_(engine_); }

  /// Gamma with the given shape and scale.
  double gamma(double shape, double scale) {
    return boost::random::gamma_distribution<double>(shape, scale)(engine_);
  }

  /// Inverse-gamma: density proportional to x^{-shape-1} exp(-scale / x).
  double inv_gamma(double shape, double scale) { return scale / gamma(shape, 1.0); }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace shrinksel

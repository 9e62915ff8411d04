#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stman {

/// Named-stream splitting: every consumer of randomness derives its own
/// engine seed from the run seed and a fixed stream name, so adding a new
/// consumer never perturbs the draws seen by existing ones.
///
///   stream_seed(seed, name) = splitmix64(seed XOR fnv1a64(name))
std::uint64_t stream_seed(std::uint64_t seed, std::string_view name);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view stream) : engine_(stream_seed(seed, stream)) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double uniform01() { return uniform(0.0, 1.0); }
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  /// Uniform integer in [lo, hi].
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool bernoulli(double p) { return uniform01() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stman

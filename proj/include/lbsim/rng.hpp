#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lbsim {

// 64-bit FNV-1a; used both for deriving named random substreams and for
// fingerprinting event logs.
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Deterministic random source. Substreams are derived from (master seed,
// stream name) so that adding a consumer of one stream never perturbs the
// draw sequence of another. All samplers are inverse-CDF over the raw
// engine output: std::mt19937_64 is bit-exact across platforms, while the
// standard-library distributions are not.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::string_view stream_name)
      : engine_(mix(master_seed, stream_name)) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Exponential with the given mean (inverse CDF).
  double exponential(double mean) {
    return -mean * std::log1p(-uniform01());
  }

  // Pareto with shape alpha and scale x_m (inverse CDF); mean is
  // x_m * alpha / (alpha - 1) for alpha > 1.
  double pareto(double shape, double scale) {
    return scale / std::pow(1.0 - uniform01(), 1.0 / shape);
  }

  // Index drawn from a normalized weight vector by inverse CDF walk.
  template <typename Weights>
  std::size_t weighted_index(const Weights& weights) {
    const double u = uniform01();
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      cum += weights[i];
      last = i;
      if (u < cum) return i;
    }
    return last;  // guard against rounding at the top of the CDF
  }

  std::uint64_t raw() { return engine_(); }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = fnv1a(name);
    // splitmix64 finalizer over seed ^ name-hash keeps distinct streams
    // decorrelated even for adjacent master seeds.
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace lbsim

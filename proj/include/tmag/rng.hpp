#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tmag/types.hpp"

namespace tmag {

// All randomness in a run flows from one config seed. Sub-streams are derived
// by mixing tag words into the seed, so that e.g. (seed, task, step) always
// yields the same stream regardless of execution order.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return mix_seed(seed); }

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
  return derive_seed(mix_seed(seed ^ mix_seed(tag)), rest...);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  template <typename... Tags>
  static RngStream keyed(std::uint64_t seed, Tags... tags) {
    return RngStream(derive_seed(seed, static_cast<std::uint64_t>(tags)...));
  }

  // Uniform double in [0, 1). Hand-rolled from raw bits so results do not
  // depend on the standard library's distribution implementation.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  Index index(Index n) { return static_cast<Index>(uniform_index(static_cast<std::uint64_t>(n))); }

  double normal() {
    // Box-Muller; one value per call keeps the stream layout simple.
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Xavier-range uniform fill: entries in +-sqrt(6 / (fan_in + fan_out)).
inline void xavier_fill(Mat& m, Index fan_in, Index fan_out, RngStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
}

}  // namespace tmag

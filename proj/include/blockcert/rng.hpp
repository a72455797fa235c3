#pragma once

#include <cmath>
#include <cstdint>

namespace blockcert {

// Counter-free splittable generator. We avoid std::normal_distribution and
// friends because their output is implementation-defined; experiment
// reproducibility requires the same stream from the same seed everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never returns 0 so it is log-safe.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // +1 or -1 with equal probability.
  double sign() { return (next() >> 63) ? 1.0 : -1.0; }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Independent stream derived from (seed, stream). Cheap enough to call per
// Monte-Carlo trial, and nested sampling (trial t only depends on t) comes
// for free.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 mixer(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
  return SplitMix64(mixer.next());
}

}  // namespace blockcert

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace deephedge {

// SplitMix64 output function (Steele/Lea/Flood, "Fast splittable pseudorandom
// number generators"). Used only to derive independent substream keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Key for substream `stream` of a master seed. Distinct streams get distinct
// keys (the increment is odd, so seed + stream * gamma is injective mod 2^64),
// which makes every Monte Carlo path independent of execution order.
inline std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + stream * 0x9E3779B97F4A7C15ULL);
}

// Random stream owned by a single simulated path (or by a sampler).
//
// The generator core is std::mt19937_64; all variate transforms are spelled
// out here so the draw sequence is fixed by this file and not by the standard
// library's unspecified distribution algorithms. Draw order per call:
//   uniform      - one 64-bit word
//   normal       - two uniforms on the first call of a pair (Box-Muller),
//                  none on the second (cached spare)
//   exponential  - one uniform
//   poisson      - a variable number of uniforms; none at all for mean == 0
class PathRng {
 public:
  explicit PathRng(std::uint64_t key) : gen_(key) {}

  // Uniform on (0, 1]; 53-bit resolution, never returns 0 so log() is safe.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; draws are produced in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * kPi * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

  // Poisson count via Knuth's product method; adequate for the small
  // per-step intensities used by the jump models. mean <= 0 returns 0
  // without consuming any draws, so a jump-free model consumes exactly
  // the same stream as its diffusion-only counterpart.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  // Uniform integer in [0, n) by rejection; used for shuffling.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// In-place Fisher-Yates shuffle with our own bounded-int draws, so shuffles
// are reproducible across standard library implementations.
template <typename T>
void shuffle_in_place(std::vector<T>& items, PathRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace deephedge

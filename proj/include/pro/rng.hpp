#pragma once

#include <cassert>
#include <cstdint>
#include <limits>
#include <random>

namespace pro {

// splitmix64 finalizer. Used to derive independent per-instance seeds from a
// master seed so sweeps stay reproducible no matter how work is scheduled.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t counter) {
  return mix_seed(master + 0x9E3779B97F4A7C15ull * (counter + 1));
}

// mt19937_64 plus hand-rolled draw helpers. std::*_distribution is not
// pinned down by the standard, so going through these keeps random streams
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in {0, ..., n-1}, unbiased via rejection.
  uint64_t below(uint64_t n) {
    assert(n > 0);
    const uint64_t max = std::numeric_limits<uint64_t>::max();
    const uint64_t limit = max - max % n;
    uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % n;
  }

  // Uniform integer in [lo, hi], inclusive.
  int range(int lo, int hi) {
    assert(lo <= hi);
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace pro

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ccsim {

uint64_t splitmix64(uint64_t x);

/// Mixes an arbitrary key tuple into a single 64-bit stream seed.
uint64_t mix_key(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

/// One deterministic random stream. Streams are keyed by
/// (global seed, node, channel instance, shot block), so results do not
/// depend on how blocks are distributed over workers.
class StreamRng {
 public:
  explicit StreamRng(uint64_t key) : eng_(key) {}

  uint64_t bits() { return eng_(); }

  /// Uniform in (0, 1].
  double uniform_open_closed() {
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(eng_); }

  /// Number of failures before the next success at rate p: the geometric
  /// skip floor(log u / log(1-p)). p=1 always returns 0.
  uint64_t geometric_skip(double p) {
    if (p >= 1.0) return 0;
    double u = uniform_open_closed();
    double g = std::floor(std::log(u) / std::log1p(-p));
    if (g > 9e18) return UINT64_MAX;
    return (uint64_t)g;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// One uniform bit keyed by (seed, tag, shot); used to dress genuinely
/// random measurement outcomes at result-extraction time.
inline int keyed_bit(uint64_t seed, uint64_t tag, uint64_t shot) {
  return (int)(splitmix64(mix_key(seed, tag, shot)) & 1);
}

}  // namespace ccsim

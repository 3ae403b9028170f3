#pragma once
// Deterministic random streams: xoshiro256++ seeded through splitmix64.
//
// Every stochastic kernel owns a substream derived from (seed, id1, id2).
// Parallel loops assign one substream per fixed-size block of work, so the
// generated numbers depend only on the seed and the block index, never on
// the number of threads. std::random distributions are avoided on purpose:
// their output is implementation-defined and would break byte-identical
// artifacts across toolchains.

#include <cstdint>
#include <cmath>

#include "qdc/common.hpp"

namespace qdc {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) { seed_from(seed); }

  // Substream splitting rule: hash-chain seed with the two ids through
  // splitmix64. Documented contract: child streams for distinct (id1, id2)
  // are independent for all practical purposes.
  Rng(std::uint64_t seed, std::uint64_t id1, std::uint64_t id2 = 0) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x9E3779B97F4A7C15ull * (id1 + 1);
    (void)splitmix64(s);
    s ^= 0xC2B2AE3D27D4EB4Full * (id2 + 1);
    seed_from(s);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0, 1), 53-bit resolution
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  bool bernoulli(double p) { return u01() < p; }

  double exponential(double mean) { return -mean * std::log1p(-u01()); }

  // Box-Muller, two uniforms per draw (no cached state, no rejection)
  double normal() {
    const double r = std::sqrt(-2.0 * std::log1p(-u01()));
    return r * std::cos(2.0 * kPi * u01());
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // exact Poisson via cumulative exponential arrivals; O(mean)
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::uint64_t k = 0;
    double acc = exponential(1.0);
    while (acc < mean) {
      ++k;
      acc += exponential(1.0);
    }
    return k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void seed_from(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t s_[4];
};

// substream id namespaces, one per stochastic kernel
namespace stream_id {
inline constexpr std::uint64_t kOverhauser = 1;
inline constexpr std::uint64_t kPhotonStream = 2;
inline constexpr std::uint64_t kTomography = 3;
inline constexpr std::uint64_t kHom = 4;
inline constexpr std::uint64_t kSynthetic = 5;
}  // namespace stream_id

}  // namespace qdc

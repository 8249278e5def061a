#pragma once

#include <cmath>
#include <cstdint>

// Deterministic random numbers. std::mt19937_64 is portable but the standard
// distributions are not bit-stable across library versions, so the few draws
// we need are implemented here on top of splitmix64.

namespace cwmap {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream id for scene/corruption index `index` under master seed `seed`.
// Streams for distinct indices are independent for our purposes.
inline uint64_t derive_stream(uint64_t seed, uint64_t index) {
  uint64_t s = seed ^ 0xA0761D6478BD642Full;
  (void)splitmix64(s);
  s ^= index * 0xE7037ED1A0B428DBull;
  (void)splitmix64(s);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + int(next_u64() % uint64_t(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller, one value per call. The paired value is discarded to keep
  // the draw count independent of usage patterns.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  uint64_t state_;
};

// Counter-based standard normal keyed by (seed, salt, index). Thread-order
// independent, which keeps parallel noise kernels bit-reproducible.
inline double gaussian_at(uint64_t seed, uint64_t salt, uint64_t index) {
  uint64_t s = derive_stream(seed ^ (salt * 0x9E3779B97F4A7C15ull), index);
  Rng r(s);
  return r.normal();
}

}  // namespace cwmap

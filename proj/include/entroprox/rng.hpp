#pragma once

#include <cmath>
#include <cstdint>

namespace entroprox::rng {

// splitmix64 (public domain, Vigna): full-period 2^64 counter stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a substream key from (key, id); used to split one master seed into
// independent streams for (player, iteration, chain, ...) tuples.
inline std::uint64_t mix(std::uint64_t key, std::uint64_t id) {
  std::uint64_t s = key;
  std::uint64_t h = splitmix64(s) ^ id;
  return splitmix64(h);
}

inline std::uint64_t mix(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  return mix(mix(key, a), b);
}

inline std::uint64_t mix(std::uint64_t key, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  return mix(mix(key, a, b), c);
}

// Deterministic stream of doubles keyed by its construction seed. Streams
// with distinct keys are independent for all practical purposes; the same
// key always reproduces the same sequence bit-for-bit.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller (cosine branch; no cached second value so
  // the draw count per sample is fixed at two uniforms).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace entroprox::rng

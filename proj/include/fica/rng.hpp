#pragma once

#include <cstdint>
#include <cmath>

// Seeding and sampling primitives. Everything here is deterministic given the
// inputs; no globals. std::* distributions are avoided on purpose: their
// output is implementation-defined, which would break the bit-identical
// reproducibility contract of the Monte Carlo harness.

namespace fica::rng {

// SplitMix64 step (Vigna). Used both as a stand-alone mixer and to expand
// seeds into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, stream_id).
// Collision-free in practice: full 64-bit avalanche over both inputs.
inline std::uint64_t derive(std::uint64_t master, std::uint64_t stream_id) noexcept {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (stream_id * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
  std::uint64_t b = splitmix64(s);
  return b ^ splitmix64(s);
}

// xoshiro256++ (Blackman & Vigna), seeded via SplitMix64 as its authors
// recommend.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~0ull; }

  result_type operator()() noexcept {
    const std::uint64_t out = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return out;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Uniform double in [0,1) with 53 random mantissa bits.
inline double uniform01(Engine& g) noexcept {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal deviates via Box-Muller; the second value of each pair is
// cached so consecutive calls consume uniforms at a fixed, reproducible rate.
class Normal {
 public:
  double operator()(Engine& g) noexcept {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform01(g);
    while (u1 <= 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace fica::rng

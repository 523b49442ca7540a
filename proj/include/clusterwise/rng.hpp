#pragma once

// Self-contained deterministic RNG. Simulation results must be bit-identical
// for a given (seed, stream) on every platform and for any worker count, so
// we avoid std::<random> distributions (their algorithms are
// implementation-defined) and fix the generator and the draw algorithms here.

#include <array>
#include <cmath>
#include <cstdint>

namespace clusterwise {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64(sm);
  }

  // Independent stream for a (seed, stream_id) pair. Replication z of a
  // Monte Carlo run uses stream(seed, z); scenario construction uses a
  // reserved id (see montecarlo.hpp). Streams are decorrelated by mixing the
  // id into the splitmix seeding chain.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    Rng r(0);
    std::uint64_t sm = seed;
    (void)splitmix64(sm);
    sm ^= (stream_id + 1) * 0xD6E8FEB86659FD93ULL;
    for (auto& w : r.state_) w = splitmix64(sm);
    r.have_spare_ = false;
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer on [lo, hi] (Lemire's method).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * span;
    auto low = static_cast<std::uint64_t>(m);
    if (low < span) {
      const std::uint64_t threshold = (0 - span) % span;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * span;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::int64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));  // u1 < 1 always
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace clusterwise

// Splittable deterministic RNG (splitmix64 core). Children derived from the
// construction seed, so derivation is independent of how much the parent has
// already drawn.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "starnoma/linalg.hpp"

namespace starnoma {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Draws below `bound` without modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0} / bound));
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Independent child stream keyed on (construction seed, key).
  Rng derive(std::uint64_t key) const {
    std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL + key * 0xd1342543de82ef95ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Circularly-symmetric complex normal entries, unit variance per entry.
inline CMat sample_cn01(Rng& rng, int rows, int cols) {
  CMat out(rows, cols);
  const double scale = std::sqrt(0.5);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = cplx{scale * rng.normal(), scale * rng.normal()};
  return out;
}

}  // namespace starnoma

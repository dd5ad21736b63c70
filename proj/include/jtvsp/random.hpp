#pragma once

#include "jtvsp/common.hpp"

#include <cmath>
#include <cstdint>

namespace jtvsp {

enum class NoiseKind { gaussian, uniform, rademacher };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Keyed substream of a master seed. Substream r draws the same values no
// matter how many draws other substreams made, so trial schedules reproduce
// bit-identically. Gaussians come from Box-Muller rather than
// std::normal_distribution, whose output is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) : state_(seed) {
    detail::splitmix64(state_);
    state_ ^= 0x94d049bb133111ebULL * (stream + 1);
    detail::splitmix64(state_);
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Zero-mean, unit-variance draw of the requested kind.
  double unit_noise(NoiseKind kind) {
    switch (kind) {
      case NoiseKind::gaussian:
        return gaussian();
      case NoiseKind::uniform:
        return (2.0 * uniform01() - 1.0) * std::sqrt(3.0);
      case NoiseKind::rademacher:
        return (next_u64() & 1u) ? 1.0 : -1.0;
    }
    return 0.0;  // unreachable
  }

 private:
  std::uint64_t state_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Deterministic child seed for nested loops (e.g. grid point a, trial b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  detail::splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  detail::splitmix64(s);
  s ^= 0xbf58476d1ce4e5b9ULL * (b + 1);
  detail::splitmix64(s);
  return s;
}

// Column-major fill; the draw order is part of the reproducibility contract.
inline Matrix white_noise_matrix(RandomStream& rng, Index rows, Index cols, NoiseKind kind) {
  Matrix w(rows, cols);
  for (Index t = 0; t < cols; ++t)
    for (Index i = 0; i < rows; ++i) w(i, t) = rng.unit_noise(kind);
  return w;
}

}  // namespace jtvsp

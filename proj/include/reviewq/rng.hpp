#pragma once

// Seeded randomness with results that do not depend on the standard
// library's distribution implementations.

#include <cstdint>
#include <random>
#include <vector>

namespace reviewq {

using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double unit_double(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in [0, n), rejection-sampled to avoid modulo bias. n > 0.
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T> void shuffle_in_place(std::vector<T> &v, Rng &rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Index drawn from a discrete distribution given by `weights` (need not be
/// normalized). Falls back to the last index on rounding residue.
template <typename Range> std::size_t sample_categorical(const Range &weights, Rng &rng) {
  double total = 0.0;
  for (double w : weights)
    total += w;
  double u = unit_double(rng) * total;
  std::size_t i = 0;
  std::size_t last = 0;
  for (double w : weights) {
    if (w > 0.0) {
      last = i;
      if (u < w)
        return i;
      u -= w;
    }
    ++i;
  }
  return last;
}

} // namespace reviewq

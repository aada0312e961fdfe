#pragma once

#include <cstdint>
#include <cstring>
#include <cmath>
#include <random>
#include <string_view>
#include <vector>

// Deterministic randomness. std::mt19937_64 output is fully specified by the
// standard; the distribution helpers below are hand-rolled because the
// std::*_distribution classes are implementation-defined and would break
// cross-platform reproducibility of seeds, sampled bags and synthetic data.

namespace mil::rng {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Unbiased integer in [0, n). Rejection sampling; n must be > 0.
inline std::uint64_t uniform_below(Engine& g, std::uint64_t n) {
  // 2^64 mod n, computed in uint64 arithmetic
  const std::uint64_t min = (0 - n) % n;
  std::uint64_t r;
  do {
    r = g();
  } while (r < min);
  return r % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

/// Standard normal via Box-Muller. Draws two words per call.
inline double normal(Engine& g, double mean = 0.0, double stddev = 1.0) {
  const double u1 = (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform01(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

/// Fisher-Yates shuffle on top of uniform_below.
template <typename T>
void shuffle(std::vector<T>& v, Engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Draws k distinct indices from [0, n) (k <= n), order randomized.
inline std::vector<std::uint64_t> sample_without_replacement(Engine& g, std::uint64_t n,
                                                             std::uint64_t k) {
  std::vector<std::uint64_t> idx(n);
  for (std::uint64_t i = 0; i < n; ++i) idx[i] = i;
  // partial Fisher-Yates: first k slots end up uniformly chosen
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + uniform_below(g, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t h = kFnvOffset) {
  char buf[8];
  std::memcpy(buf, &value, 8);
  return fnv1a64(std::string_view(buf, 8), h);
}

/// Stable seed for the bag of `image_id` at `epoch` under master `seed`.
/// Same triple -> same bag, across runs and platforms.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t epoch,
                                 std::string_view image_id) {
  std::uint64_t h = fnv1a64(seed);
  h = fnv1a64(epoch, h);
  return fnv1a64(image_id, h);
}

}  // namespace mil::rng

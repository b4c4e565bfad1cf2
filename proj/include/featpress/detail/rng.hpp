#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace featpress::detail {

// splitmix64 finalizer; used to derive independent substream seeds from one
// root seed so parallel workers never share an engine.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return mix64(root ^ mix64(stream + 0x6a09e667f3bcc909ULL));
}

// mt19937_64 output is fully specified by the standard. std::*_distribution
// is not, so all sampling below is hand-rolled to keep results reproducible.
using engine = std::mt19937_64;

inline engine make_engine(std::uint64_t seed) { return engine(seed); }

inline double uniform01(engine& rng) {  // [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_index(engine& rng, std::uint64_t n) {  // [0, n)
  const std::uint64_t rem =
      (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  if (rem == 0) return rng() % n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem + 1;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Box-Muller; consumes exactly two engine draws per call.
inline double normal01(engine& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1], keeps log() finite
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, engine& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace featpress::detail

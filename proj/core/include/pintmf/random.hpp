#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pintmf {

using Rng = std::mt19937_64;

// splitmix64 finalizer
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a path of integer tags.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix_seed(base);
  for (auto t : tags) s = mix_seed(s ^ mix_seed(t + 0x632be59bd9b4e019ULL));
  return s;
}

/// Uniform integer in [0, bound) from raw engine output. Portable across standard libraries.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

/// Fisher-Yates shuffle built on uniform_below, so fold assignments do not depend on
/// the standard library's std::shuffle.
template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// First `k` entries of a seeded permutation of 0..n-1.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

}  // namespace pintmf

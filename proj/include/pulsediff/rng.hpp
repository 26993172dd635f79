#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace pulsediff {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives a named sub-stream seed from a parent seed. The same (seed, name,
/// ids) triple always yields the same value on every platform.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                                    std::initializer_list<std::uint64_t> ids = {}) {
  std::uint64_t h = detail::splitmix64(seed ^ detail::fnv1a(name));
  for (std::uint64_t id : ids) h = detail::splitmix64(h ^ detail::splitmix64(id));
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::string_view name,
                    std::initializer_list<std::uint64_t> ids = {}) {
  return Rng(derive_seed(seed, name, ids));
}

}  // namespace pulsediff

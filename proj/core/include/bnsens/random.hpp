#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>

namespace bnsens {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to turn names and tags into seed components.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t seed_part(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }
constexpr std::uint64_t seed_part(std::uint64_t v) noexcept { return v; }
constexpr std::uint64_t seed_part(std::int64_t v) noexcept { return static_cast<std::uint64_t>(v); }
constexpr std::uint64_t seed_part(int v) noexcept { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
constexpr std::uint64_t seed_part(unsigned v) noexcept { return v; }
constexpr std::uint64_t seed_part(std::string_view v) noexcept { return hash_string(v); }
constexpr std::uint64_t seed_part(const char* v) noexcept { return hash_string(v); }

/// Derives an independent stream seed from a master seed and a coordinate
/// tuple. The result depends only on the values, so streams can be created
/// in any order.
template <class... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t master, const Parts&... parts) noexcept {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  ((h = mix64(h ^ mix64(seed_part(parts) + 0x3c6ef372fe94f82bULL))), ...);
  return h;
}

/// Uniform draw in [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace bnsens

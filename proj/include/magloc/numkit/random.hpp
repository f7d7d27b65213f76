#pragma once

#include <cstdint>
#include <string_view>

namespace magloc::numkit {

/// splitmix64 finalizer. Used to derive independent seeds from a master seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  return mix64(mix64(master) ^ (salt * 0xd6e8feb86659fd93ULL + 0x632be59bd9b4e019ULL));
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// xoshiro256** with portable uniform/normal conversions, so sampled values do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // N(0, 1), Box-Muller
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t below(std::uint64_t n);  // [0, n)

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace magloc::numkit

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace copoe {

using Rng = std::mt19937_64;

// Named substreams: every component derives its generator from the master
// seed, a stream name and an index, so any piece can be replayed alone.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ hash_name(name)) + splitmix64(index + 1));
}

inline Rng make_rng(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(master, name, index));
}

/// Fresh seed drawn from an existing generator (for child streams).
inline std::uint64_t draw_seed(Rng& rng) { return splitmix64(rng()); }

}  // namespace copoe

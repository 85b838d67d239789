#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rescom {

// All randomness flows from one root seed through named sub-streams, so a
// change in one subsystem never perturbs another's draws.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
  std::uint64_t h = root ^ 0x9e3779b97f4a7c15ull;
  for (char c : name) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ull;
  }
  // splitmix64 finalizer
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view name) {
  return std::mt19937_64(substream_seed(root, name));
}

}  // namespace rescom

#ifndef TKMERGE_RNG_HPP
#define TKMERGE_RNG_HPP

#include <cstdint>

namespace tkmerge {

// splitmix64 step; used to derive independent seed streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for stream `index` (restart, level, component, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base;
  splitmix64(s);
  s ^= 0xD1B54A32D192ED03ull * (index + 1);
  std::uint64_t out = splitmix64(s);
  return out ^ splitmix64(s);
}

}  // namespace tkmerge

#endif

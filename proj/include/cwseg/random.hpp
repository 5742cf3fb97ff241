#pragma once

#include <cstdint>

namespace cwseg {

// SplitMix64 (Steele, Lea, Flood 2014). The stream is part of the weight
// generation contract, so it is spelled out here rather than borrowed from
// <random>, whose distributions are implementation-defined.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Top 24 bits scaled to [0, 1); exact in float.
  float uniform01() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

  // (2u - 1) * scale, evaluated in float.
  float uniform_symmetric(float scale) { return (2.0f * uniform01() - 1.0f) * scale; }

 private:
  std::uint64_t state_;
};

}  // namespace cwseg

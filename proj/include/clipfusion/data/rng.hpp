#pragma once

#include <cstdint>
#include <string_view>

namespace clipfusion {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text) noexcept;

// SplitMix64 finalizer: a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x) noexcept;

// SplitMix64 generator (Steele, Lea, Flood 2014): state += 0x9E3779B97F4A7C15,
// output = mix64(state). Fully specified, so a seed reproduces the same stream
// on every platform and in any language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;

  // Uniform integer in [0, bound) by rejection, bound >= 1.
  std::uint64_t below(std::uint64_t bound) noexcept;

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept;

  // Standard normal via Box-Muller (one value per call).
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

// Deterministic uniform value in [-1, 1) for a hashed key.
double hash_unit(std::uint64_t key) noexcept;

}  // namespace clipfusion

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace fxtfhe {

// Seedable generator. Named sub-streams let independent consumers draw from
// the same top-level seed without sharing state.
class Prng {
 public:
  explicit Prng(std::uint64_t seed);

  // Sub-stream derived from (seed, name, index).
  static Prng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

  std::uint64_t next_u64();
  std::uint32_t next_u32();
  std::uint8_t next_bit();
  // Uniform in (0, 1].
  double uniform_open01();
  // Standard normal via Box-Muller.
  double gaussian();
  std::uint64_t uniform_below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view name, std::uint64_t index);

}  // namespace fxtfhe

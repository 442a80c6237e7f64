#include "fxtfhe/random.hpp"

#include <cmath>
#include <numbers>

namespace fxtfhe {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(splitmix64(seed ^ h) + index);
}

Prng::Prng(std::uint64_t seed) : engine_(seed) {}

Prng Prng::stream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  return Prng(mix_seed(seed, name, index));
}

std::uint64_t Prng::next_u64() { return engine_(); }

std::uint32_t Prng::next_u32() { return static_cast<std::uint32_t>(engine_() >> 32); }

std::uint8_t Prng::next_bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

double Prng::uniform_open01() {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double Prng::gaussian() {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform_open01();
  double u2 = uniform_open01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t Prng::uniform_below(std::uint64_t bound) {
  // Lemire's rejection method.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace fxtfhe

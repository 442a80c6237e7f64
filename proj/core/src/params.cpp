#include "fxtfhe/params.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "fxtfhe/torus.hpp"

namespace fxtfhe {

void TfheParams::validate() const {
  if (n < 0) throw std::invalid_argument("n must be non-negative");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (N < 2 || !is_power_of_two(static_cast<std::size_t>(N))) {
    throw std::invalid_argument("N must be a power of two >= 2");
  }
  if (l < 1 || beta < 1) throw std::invalid_argument("l and beta must be >= 1");
  if (l * beta > 32) throw std::invalid_argument("l*beta must be <= 32");
  if (!(sigma_tlwe >= 0.0) || !(sigma_tglwe >= 0.0)) {
    throw std::invalid_argument("noise stddev must be non-negative");
  }
}

std::uint64_t TfheParams::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(n));
  mix(static_cast<std::uint64_t>(k));
  mix(static_cast<std::uint64_t>(N));
  mix(static_cast<std::uint64_t>(beta));
  mix(static_cast<std::uint64_t>(l));
  mix(std::bit_cast<std::uint64_t>(sigma_tlwe));
  mix(std::bit_cast<std::uint64_t>(sigma_tglwe));
  return h;
}

TfheParams TfheParams::set_i() {
  TfheParams p;
  p.name = "I";
  p.n = 586;
  p.k = 2;
  p.N = 512;
  p.beta = 8;
  p.l = 2;
  p.sigma_tlwe = 0.00008976167396834328;
  p.sigma_tglwe = 0.00000002989040792967434;
  return p;
}

TfheParams TfheParams::set_ii() {
  TfheParams p;
  p.name = "II";
  p.n = 500;
  p.k = 1;
  p.N = 1024;
  p.beta = 10;
  p.l = 2;
  p.sigma_tlwe = std::ldexp(1.0, -15);
  p.sigma_tglwe = std::ldexp(1.0, -25);
  return p;
}

TfheParams TfheParams::preset(const std::string& name) {
  if (name == "I" || name == "1") return set_i();
  if (name == "II" || name == "2") return set_ii();
  throw std::invalid_argument("unknown parameter set: " + name);
}

}  // namespace fxtfhe

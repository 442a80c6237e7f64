#include "fxtfhe/gadget.hpp"

#include <stdexcept>

namespace fxtfhe {

void GadgetParams::validate() const {
  if (beta < 1 || l < 1) throw std::invalid_argument("gadget beta and l must be >= 1");
  if (beta * l > 32) throw std::invalid_argument("gadget l*beta must be <= 32");
  if (beta > 30) throw std::invalid_argument("gadget beta must be <= 30");
}

namespace {

// Rounded value in units of 2^{32 - l*beta}, reduced modulo 2^{l*beta}.
std::uint64_t rounded_units(Torus32 a, const GadgetParams& g) {
  const int shift = 32 - g.l * g.beta;
  if (shift == 0) return a;
  const std::uint64_t half = 1ULL << (shift - 1);
  const std::uint64_t low = a & ((1ULL << shift) - 1);
  std::uint64_t q = static_cast<std::uint64_t>(a) >> shift;
  if (low > half || (low == half && (g.tie == TieRule::kHalfUp || (q & 1) == 1))) ++q;
  return q & ((1ULL << (g.l * g.beta)) - 1);
}

}  // namespace

Torus32 gadget_round(Torus32 a, const GadgetParams& g) {
  const int shift = 32 - g.l * g.beta;
  return static_cast<Torus32>(rounded_units(a, g) << shift);
}

void gadget_decompose(Torus32 a, const GadgetParams& g, std::span<std::int32_t> digits) {
  if (digits.size() != static_cast<std::size_t>(g.l)) throw std::invalid_argument("digit buffer size");
  std::uint64_t v = rounded_units(a, g);
  const std::int64_t base = 1LL << g.beta;
  const std::int64_t half = base / 2;
  for (int j = g.l - 1; j >= 0; --j) {
    auto d = static_cast<std::int64_t>(v & static_cast<std::uint64_t>(base - 1));
    v >>= g.beta;
    if (d >= half) {
      d -= base;
      v += 1;
    }
    digits[static_cast<std::size_t>(j)] = static_cast<std::int32_t>(d);
  }
}

std::vector<std::int32_t> gadget_decompose(Torus32 a, const GadgetParams& g) {
  g.validate();
  std::vector<std::int32_t> digits(static_cast<std::size_t>(g.l));
  gadget_decompose(a, g, digits);
  return digits;
}

Torus32 gadget_recompose(std::span<const std::int32_t> digits, int beta) {
  Torus32 acc = 0;
  for (std::size_t j = 0; j < digits.size(); ++j) {
    const int shift = 32 - static_cast<int>(j + 1) * beta;
    acc += static_cast<Torus32>(digits[j]) << shift;
  }
  return acc;
}

std::vector<IntPolynomial> gadget_decompose(const TorusPolynomial& p, const GadgetParams& g) {
  g.validate();
  std::vector<IntPolynomial> out(static_cast<std::size_t>(g.l), IntPolynomial(p.size()));
  std::array<std::int32_t, 32> buf{};
  std::span<std::int32_t> digits(buf.data(), static_cast<std::size_t>(g.l));
  for (std::size_t i = 0; i < p.size(); ++i) {
    gadget_decompose(p[i], g, digits);
    for (int j = 0; j < g.l; ++j) out[static_cast<std::size_t>(j)][i] = digits[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace fxtfhe

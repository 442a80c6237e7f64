#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fxtfhe/torus.hpp"

namespace fxtfhe {

// Tie rule for rounding away the low 32 - l*beta bits.
enum class TieRule { kHalfUp, kHalfEven };

struct GadgetParams {
  int beta = 0;
  int l = 0;
  TieRule tie = TieRule::kHalfUp;

  void validate() const;
};

// Rounds a to the nearest multiple of 2^{32 - l*beta}.
Torus32 gadget_round(Torus32 a, const GadgetParams& g);

// Balanced digits d_1..d_l in [-2^{beta-1}, 2^{beta-1}); d_1 has weight 2^{32-beta}.
void gadget_decompose(Torus32 a, const GadgetParams& g, std::span<std::int32_t> digits);
std::vector<std::int32_t> gadget_decompose(Torus32 a, const GadgetParams& g);

// Sum of digit_j * 2^{32 - j*beta} modulo 2^32.
Torus32 gadget_recompose(std::span<const std::int32_t> digits, int beta);

// Digit polynomials, level-major: out[j] holds digit j+1 of every coefficient.
std::vector<IntPolynomial> gadget_decompose(const TorusPolynomial& p, const GadgetParams& g);

}  // namespace fxtfhe

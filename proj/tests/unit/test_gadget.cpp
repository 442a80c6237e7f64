#include <gtest/gtest.h>

#include <array>

#include "fxtfhe/gadget.hpp"
#include "fxtfhe/random.hpp"
#include "oracles.hpp"

namespace fxtfhe {
namespace {

const GadgetParams kG8x2{8, 2, TieRule::kHalfUp};

TEST(Gadget, ZeroGivesZeroDigits) {
  auto d = gadget_decompose(0u, kG8x2);
  EXPECT_EQ(d, (std::vector<std::int32_t>{0, 0}));
}

TEST(Gadget, Example0x12345678) {
  EXPECT_EQ(gadget_round(0x12345678u, kG8x2), 0x12340000u);
  auto d = gadget_decompose(0x12345678u, kG8x2);
  EXPECT_EQ(d, (std::vector<std::int32_t>{18, 52}));
  EXPECT_EQ(d, oracle::balanced_digits(0x12345678u, 8, 2));
  EXPECT_EQ(gadget_recompose(d, 8), 0x12340000u);
}

// 0x0000FF80 rounds up to 0x00010000 = 1 * 2^{32-2*8}, so the low digit is
// 1 and the high digit 0 under the weight convention d_1 * 2^24 + d_2 * 2^16.
TEST(Gadget, CarryEdge0x0000FF80) {
  EXPECT_EQ(gadget_round(0x0000FF80u, kG8x2), 0x00010000u);
  auto d = gadget_decompose(0x0000FF80u, kG8x2);
  EXPECT_EQ(d, (std::vector<std::int32_t>{0, 1}));
  EXPECT_EQ(gadget_recompose(d, 8), 0x00010000u);
}

TEST(Gadget, TopDigitCarryWraps) {
  // 0x7F800000 has d_1 = 127 and d_2 = 128, which becomes -128 with a carry
  // that pushes d_1 to 128, wrapping to -128.
  auto d = gadget_decompose(0x7F800000u, kG8x2);
  EXPECT_EQ(d, (std::vector<std::int32_t>{-128, -128}));
  EXPECT_EQ(gadget_recompose(d, 8), 0x7F800000u);
}

TEST(Gadget, TieRules) {
  GadgetParams even{8, 2, TieRule::kHalfEven};
  EXPECT_EQ(gadget_round(0x00008000u, kG8x2), 0x00010000u);
  EXPECT_EQ(gadget_round(0x00008000u, even), 0x00000000u);
  EXPECT_EQ(gadget_round(0x00018000u, even), 0x00020000u);
}

TEST(Gadget, BruteForceDigitsSmallBase) {
  // With beta = 3, l = 2 every digit pair can be enumerated.
  GadgetParams g{3, 2, TieRule::kHalfUp};
  Prng prng(1);
  for (int t = 0; t < 2000; ++t) {
    Torus32 a = prng.next_u32();
    const Torus32 rounded = oracle::rounded_gadget_value(a, 3, 2);
    int matches = 0;
    std::array<std::int32_t, 2> found{};
    for (int d1 = -4; d1 < 4; ++d1) {
      for (int d2 = -4; d2 < 4; ++d2) {
        std::array<std::int32_t, 2> cand{d1, d2};
        if (gadget_recompose(cand, 3) == rounded) {
          ++matches;
          found = cand;
        }
      }
    }
    ASSERT_EQ(matches, 1);
    auto d = gadget_decompose(a, g);
    ASSERT_EQ(d[0], found[0]);
    ASSERT_EQ(d[1], found[1]);
  }
}

TEST(Gadget, PolynomialLayoutIsLevelMajor) {
  Prng prng(2);
  auto p = uniform_torus_polynomial(prng, 32);
  auto digits = gadget_decompose(p, kG8x2);
  ASSERT_EQ(digits.size(), 2u);
  for (std::size_t i = 0; i < 32; ++i) {
    auto d = gadget_decompose(p[i], kG8x2);
    EXPECT_EQ(digits[0][i], d[0]);
    EXPECT_EQ(digits[1][i], d[1]);
  }
}

TEST(Gadget, ParameterViolation) {
  EXPECT_THROW(gadget_decompose(1u, GadgetParams{11, 3, TieRule::kHalfUp}), std::invalid_argument);
  EXPECT_THROW(gadget_decompose(1u, GadgetParams{0, 3, TieRule::kHalfUp}), std::invalid_argument);
}

}  // namespace
}  // namespace fxtfhe

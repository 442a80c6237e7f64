#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/noise_lab.hpp"
#include "fxtfhe/pbs.hpp"
#include "oracles.hpp"

namespace fxtfhe {
namespace {

TEST(LogErfc, MatchesMultiprecision) {
  for (double x = -3.0; x <= 40.0; x += 0.173) {
    const double want = oracle::log_erfc_mp(x);
    ASSERT_NEAR(log_erfc(x), want, 1e-12 * std::max(1.0, std::fabs(want))) << x;
  }
  for (double x : {6.0, 6.0000001, 7.5, 11.0, 50.0, 100.0, 1000.0}) {
    const double want = oracle::log_erfc_mp(x);
    EXPECT_NEAR(log_erfc(x), want, 1e-12 * std::fabs(want)) << x;
  }
}

TEST(InverseErfc, TailTargets) {
  const double l64 = -64 * std::log(2.0);
  const double x = inverse_erfc_log(l64);
  EXPECT_NEAR(x, 6.4738, 1e-4);
  EXPECT_NEAR(log_erfc(x), l64, 1e-9);
  const double l128 = -128 * std::log(2.0);
  EXPECT_NEAR(oracle::log_erfc_mp(inverse_erfc_log(l128)), l128, 1e-9);
  EXPECT_NEAR(inverse_erfc(0.5), 0.4769362762, 1e-9);
  EXPECT_THROW(inverse_erfc_log(std::log(2.0)), std::invalid_argument);
}

TEST(OverflowProbability, Formula) {
  for (double sigma : {0.3, 1.0, 17.0}) {
    for (int p = -2; p < 8; ++p) {
      const double x = std::ldexp(1.0, p) / (2 * std::sqrt(2.0) * sigma);
      const double want = oracle::log_erfc_mp(x);
      // The linear-domain value underflows past ~exp(-700).
      if (want > -700) EXPECT_NEAR(std::log(overflow_probability(sigma, p)), want, 1e-9 * std::max(1.0, -want));
      EXPECT_NEAR(log2_overflow_probability(sigma, p) * std::log(2.0), want, 1e-9 * std::max(1.0, -want));
    }
  }
}

TEST(SelectMsb, Examples) {
  EXPECT_EQ(select_msb(1.0, 0x1p-64), 5);
  EXPECT_EQ(select_msb(1.0, 1.0), kMinMsb);
  EXPECT_EQ(select_msb(1.0, 1.0, -10), -10);
  EXPECT_THROW(select_msb(0.0, 0x1p-64), std::invalid_argument);
  EXPECT_THROW(select_msb(-1.0, 0x1p-64), std::invalid_argument);
  // The selected p is the smallest passing one.
  EXPECT_LE(overflow_probability(1.0, 5), 0x1p-64);
  EXPECT_GT(overflow_probability(1.0, 4), 0x1p-64);
}

TEST(SelectMsb, DoublingSigmaAddsOneBit) {
  Prng prng(1);
  for (int t = 0; t < 200; ++t) {
    const double sigma = std::exp(20 * (prng.uniform_open01() - 0.5));
    const int p0 = select_msb(sigma, 0x1p-64);
    for (int o = 1; o <= 10; ++o) ASSERT_EQ(select_msb(std::ldexp(sigma, o), 0x1p-64), p0 + o);
  }
}

TEST(SelectMsb, Monotone) {
  int prev = kMinMsb;
  for (double sigma = 1e-3; sigma < 1e6; sigma *= 1.37) {
    const int p = select_msb(sigma, 0x1p-40);
    EXPECT_GE(p, prev);
    prev = p;
    EXPECT_LE(select_msb(sigma, 0x1p-20), p);
    EXPECT_GE(select_msb(sigma, 0x1p-100), p);
  }
}

TEST(Budget, Splits) {
  NoiseBudget b;
  b.sigma2_total_allowed = 6.0;
  EXPECT_DOUBLE_EQ(b.approx_budget(), 3.0);
  EXPECT_DOUBLE_EQ(b.per_source_budget(), 1.0);
  b.approx_fraction = 0.0;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b.approx_fraction = 1.5;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  EXPECT_TRUE(std::isinf(NoiseBudget::unlimited().per_source_budget()));
}

TEST(Budget, TotalBudgetTail) {
  const double x_half = inverse_erfc(0.5);
  auto half = total_budget_for_half_width(1.0 / 16, 0.5);
  EXPECT_NEAR(std::sqrt(half.sigma2_total_allowed), (1.0 / 16) / (std::sqrt(2.0) * x_half), 1e-15);

  const double x32 = inverse_erfc(0x1p-32);
  auto b = total_budget(TfheParams::set_i(), 0x1p-32, 1);
  EXPECT_NEAR(std::sqrt(b.sigma2_total_allowed), (1.0 / 16) / (std::sqrt(2.0) * x32), 1e-15);
  // A Gaussian with that stddev exceeds the half-width with probability target.
  EXPECT_NEAR(std::erfc((1.0 / 16) / (std::sqrt(2.0) * std::sqrt(b.sigma2_total_allowed))), 0x1p-32, 1e-20);

  auto b2 = total_budget(TfheParams::set_i(), 0x1p-32, 2);
  EXPECT_NEAR(std::sqrt(b2.sigma2_total_allowed) * 2, std::sqrt(b.sigma2_total_allowed), 1e-15);
}

TEST(Budget, InherentIsTwicePbsVariance) {
  auto p = TfheParams::set_i();
  EXPECT_DOUBLE_EQ(inherent_budget(p).sigma2_total_allowed, 2 * pbs_output_variance(p));
  EXPECT_DOUBLE_EQ(inherent_budget(p).per_source_budget(), pbs_output_variance(p) / 3);
  EXPECT_NEAR(pbs_output_variance(p), 1.17e-5, 0.01e-5);
  EXPECT_NEAR(pbs_output_variance(TfheParams::set_ii()), 1.59e-4, 0.01e-4);
}

TEST(Budget, PbsVarianceMatchesReferenceBootstraps) {
  // Tiny parameters with a visible BK term.
  auto params = oracle::tiny_params(0x1p-20, 0x1p-22);
  auto keys = keygen(params, 1);
  auto plans = TransformPlans::reference(params.N);
  auto bk = BootstrappingKey::generate(keys, params, plans, 2);
  Prng prng(3);
  const Torus32 mu = 1u << 29;
  auto lut = constant_lut(mu, params.N);
  double s2 = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    OverflowPolicy policy;
    auto ct = tlwe_encrypt(encode_bool(true), keys.tlwe_key, params.sigma_tlwe, prng);
    auto out = programmable_bootstrap(ct, lut, bk, plans, policy);
    const double e = torus_to_double(tlwe_decrypt(out, keys.extracted_key) - mu);
    s2 += e * e;
  }
  double ones = 0;
  for (auto b : keys.tlwe_key) ones += b;
  const double predicted = pbs_output_variance(params, ones);
  EXPECT_NEAR(s2 / trials / predicted, 1.0, 0.3);
}

TEST(MeasureVariance, ZeroWorkload) {
  auto wl = make_fft_workload(FftPlan::reference(64, FftDirection::kForward), FftInput::kZero);
  for (const auto& tap : wl->taps()) {
    auto r = measure_variance(tap, *wl, 100, 1);
    EXPECT_EQ(r.variance, 0.0) << tap;
    EXPECT_EQ(r.ci_low, 0.0);
    EXPECT_EQ(r.ci_high, 0.0);
  }
}

TEST(MeasureVariance, UniformTorusInput) {
  auto wl = make_fft_workload(FftPlan::reference(512, FftDirection::kForward), FftInput::kUniformTorus);
  auto r = measure_variance("fft.input", *wl, 200, 2);
  EXPECT_EQ(r.trials, 200);
  EXPECT_EQ(r.count, 200u * 512u);
  EXPECT_LE(r.ci_low, 1.0 / 12);
  EXPECT_GE(r.ci_high, 1.0 / 12);
  EXPECT_NEAR(r.variance, 1.0 / 12, 0.003);
}

TEST(MeasureVariance, GrowsThroughUnscaledStages) {
  auto wl = make_fft_workload(FftPlan::reference(512, FftDirection::kForward), FftInput::kDigits);
  double prev = 0;
  for (const auto& tap : wl->taps()) {
    auto r = measure_variance(tap, *wl, 100, 3);
    EXPECT_GE(r.variance, prev * 0.99) << tap;
    prev = r.variance;
  }
}

TEST(MeasureVariance, Errors) {
  auto wl = make_fft_workload(FftPlan::reference(16, FftDirection::kForward), FftInput::kDigits);
  EXPECT_THROW(measure_variance("fft.input", *wl, 99, 1), std::invalid_argument);
  EXPECT_THROW(measure_variance("fft.nowhere", *wl, 100, 1), std::invalid_argument);
}

TEST(MeasureVariance, BootstrapWorkloadTaps) {
  auto params = oracle::tiny_params();
  auto plans = TransformPlans::fixed(params.N, DatapathFormats::table3(TfheParams::set_i()));
  auto wl = make_bootstrap_workload(params, plans, 4);
  const auto taps = wl->taps();
  EXPECT_NE(std::find(taps.begin(), taps.end(), "mac.output"), taps.end());
  EXPECT_NE(std::find(taps.begin(), taps.end(), "fft.output"), taps.end());
  auto r = measure_variance("fft.output", *wl, 100, 5);
  EXPECT_GT(r.variance, 0.0);
  EXPECT_TRUE(std::isfinite(r.variance));
  EXPECT_LE(r.ci_low, r.variance);
  EXPECT_GE(r.ci_high, r.variance);
}

TEST(BootstrapCi, ContainsMean) {
  std::vector<double> v;
  Prng prng(6);
  for (int i = 0; i < 500; ++i) v.push_back(prng.gaussian());
  double mean = 0;
  for (double x : v) mean += x;
  mean /= 500;
  auto [lo, hi] = bootstrap_mean_ci(v, 7);
  EXPECT_LT(lo, mean);
  EXPECT_GT(hi, mean);
  EXPECT_NEAR(hi - lo, 2 * 1.96 / std::sqrt(500.0), 0.04);
}

}  // namespace
}  // namespace fxtfhe

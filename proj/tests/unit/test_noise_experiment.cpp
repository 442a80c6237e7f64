#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fxtfhe/noise_experiment.hpp"

namespace fxtfhe {
namespace {

DatapathFormats wide(const TfheParams& p) {
  return sweep_formats(p, Knob::kBk, 46, 53);
}

// One paired Set I run shared by the tests below.
class SetIRun : public ::testing::Test {
 protected:
  static constexpr int kTrials = 100;

  static void SetUpTestSuite() {
    const auto p = TfheParams::set_i();
    configs_ = {ApproxConfig::reference(),
                ApproxConfig::fixed(wide(p), "wide53"),
                ApproxConfig::fixed(sweep_formats(p, Knob::kBk, 15), "BK:15"),
                ApproxConfig::fixed(sweep_formats(p, Knob::kBk, 17), "BK:17"),
                ApproxConfig::fixed(sweep_formats(p, Knob::kBk, 19), "BK:19"),
                ApproxConfig::fixed(sweep_formats(p, Knob::kFft, 14), "FFT:14"),
                ApproxConfig::fixed(sweep_formats(p, Knob::kIfft, 6), "IFFT:6"),
                ApproxConfig::fixed(DatapathFormats::table3(p), "table3")};
    OutputNoiseExperiment exp(p, 11);
    results_ = exp.run(configs_, kTrials);
  }

  static const NoiseEstimate& get(const std::string& label) {
    for (const auto& r : results_) {
      if (r.label == label) return r;
    }
    throw std::out_of_range(label);
  }

  static inline std::vector<ApproxConfig> configs_;
  static inline std::vector<NoiseEstimate> results_;
};

TEST_F(SetIRun, ReferenceAgainstItselfIsExactlyZero) {
  const auto& r = get("reference");
  EXPECT_EQ(r.coefficient_variance, 0.0);
  EXPECT_EQ(r.phase_variance, 0.0);
  EXPECT_EQ(r.trials, kTrials);
}

TEST_F(SetIRun, WideFloor) {
  const auto& r = get("wide53");
  EXPECT_LT(r.coefficient_variance, 1e-18);
  // Phase sums kN independent coefficient errors through <a, s>.
  const auto p = TfheParams::set_i();
  EXPECT_LT(r.phase_variance, (1 + p.k * p.N / 2.0) * 1e-18);
  EXPECT_EQ(r.overflow_count, 0u);
}

TEST_F(SetIRun, BkSlopeIsFourPerBit) {
  // Two bits apart: expect a ratio of 16. The bound covers the sampling
  // error of two 100-trial estimates.
  const double ratio = get("BK:15").coefficient_variance / get("BK:17").coefficient_variance;
  EXPECT_GT(ratio, 16.0 / 1.5);
  EXPECT_LT(ratio, 16.0 * 1.5);
  EXPECT_GT(get("BK:17").coefficient_variance, get("BK:19").coefficient_variance);
}

TEST_F(SetIRun, CombinedCloseToSumOfSources) {
  const double sum = get("BK:19").coefficient_variance + get("FFT:14").coefficient_variance +
                     get("IFFT:6").coefficient_variance;
  const double combined = get("table3").coefficient_variance;
  EXPECT_NEAR(combined / sum, 1.0, 0.2);
}

TEST_F(SetIRun, TableFormatsWithinThreeSourceBudgets) {
  const auto budget = inherent_budget(TfheParams::set_i());
  EXPECT_LE(get("table3").coefficient_variance, 3 * budget.per_source_budget());
}

TEST_F(SetIRun, CiBracketsEstimate) {
  for (const auto& r : results_) {
    EXPECT_LE(r.coefficient_ci_low, r.coefficient_variance) << r.label;
    EXPECT_GE(r.coefficient_ci_high, r.coefficient_variance) << r.label;
  }
}

TEST(NoiseExperiment, DeterministicForSeed) {
  const auto p = TfheParams::set_i();
  auto cfg = ApproxConfig::fixed(DatapathFormats::table3(p));
  NoiseExperimentOptions o;
  o.resamples = 100;
  auto a = measure_output_noise(p, cfg, 3, 5, o);
  auto b = measure_output_noise(p, cfg, 3, 5, o);
  EXPECT_EQ(a.coefficient_variance, b.coefficient_variance);
  EXPECT_EQ(a.phase_variance, b.phase_variance);
  EXPECT_EQ(a.label, cfg.label);
}

std::vector<SweepPoint> synthetic_points() {
  std::vector<SweepPoint> pts;
  for (Knob k : {Knob::kBk, Knob::kFft, Knob::kIfft}) {
    for (int f = 3; f <= 12; ++f) {
      SweepPoint p;
      p.knob = k;
      p.fractional_bits = f;
      p.variance = std::ldexp(1.0, -2 * f) * (k == Knob::kFft ? 4.0 : 1.0);
      p.ci_low = p.variance * 0.9;
      p.ci_high = p.variance * 1.1;
      p.trials = 1000;
      pts.push_back(p);
    }
  }
  return pts;
}

TEST(Selection, SmallestPassing) {
  auto pts = synthetic_points();
  EXPECT_EQ(select_fractional_bits(pts, Knob::kBk, std::numeric_limits<double>::infinity()), 3);
  EXPECT_EQ(select_fractional_bits(pts, Knob::kBk, std::ldexp(1.0, -16)), 8);
  EXPECT_EQ(select_fractional_bits(pts, Knob::kFft, std::ldexp(1.0, -16)), 9);
  EXPECT_THROW(select_fractional_bits(pts, Knob::kIfft, 1e-30), NoCandidate);
  EXPECT_THROW(select_fractional_bits({}, Knob::kIfft, 1.0), NoCandidate);
}

TEST(Selection, CsvRoundTripReselects) {
  auto pts = synthetic_points();
  std::stringstream ss;
  write_sweep_csv(ss, pts);
  auto back = read_sweep_csv(ss);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].knob, pts[i].knob);
    EXPECT_EQ(back[i].fractional_bits, pts[i].fractional_bits);
    EXPECT_EQ(back[i].variance, pts[i].variance);
    EXPECT_EQ(back[i].trials, pts[i].trials);
  }
  for (Knob k : {Knob::kBk, Knob::kFft, Knob::kIfft}) {
    for (double budget : {1e-2, 1e-4, 1e-6}) {
      EXPECT_EQ(select_fractional_bits(back, k, budget), select_fractional_bits(pts, k, budget));
    }
  }
}

TEST(Selection, CsvErrors) {
  std::istringstream none("");
  EXPECT_THROW(read_sweep_csv(none), std::runtime_error);
  std::istringstream bad("knob,fractional_bits,variance,ci_low,ci_high,trials\nBK,x,1,1,1,1\n");
  EXPECT_THROW(read_sweep_csv(bad), std::runtime_error);
  std::istringstream shortline("knob,fractional_bits,variance,ci_low,ci_high,trials\nBK,3,1\n");
  EXPECT_THROW(read_sweep_csv(shortline), std::runtime_error);
}

TEST(Selection, Json) {
  auto pts = synthetic_points();
  auto j = nlohmann::json::parse(selection_json(TfheParams::set_i(), NoiseMetric::kCoefficient, std::ldexp(1.0, -16), pts));
  EXPECT_EQ(j["params"], "I");
  EXPECT_EQ(j["metric"], "coefficient");
  EXPECT_EQ(j["selected"]["BK"]["fractional_bits"], 8);
  EXPECT_EQ(j["selected"]["BK"]["format"], "15:7:8");
  EXPECT_EQ(j["selected"]["FFT"]["format"], "24:15:9");
  auto none = nlohmann::json::parse(selection_json(TfheParams::set_i(), NoiseMetric::kPhase, 1e-30, pts));
  EXPECT_TRUE(none["selected"]["IFFT"].is_null());
}

TEST(Sweep, Formats) {
  const auto p = TfheParams::set_i();
  auto f = sweep_formats(p, Knob::kFft, 10);
  EXPECT_EQ(f.fft.to_string(), "25:15:10");
  EXPECT_EQ(f.bk.to_string(), "53:7:46");
  EXPECT_EQ(f.ifft.to_string(), "53:23:30");
  auto g = sweep_formats(TfheParams::set_ii(), Knob::kIfft, 3, 40);
  EXPECT_EQ(g.ifft.to_string(), "30:27:3");
  EXPECT_EQ(g.bk.to_string(), "40:8:32");
}

TEST(Sweep, DefaultRange) {
  const auto p = TfheParams::set_i();
  auto bk = default_range(p, Knob::kBk);
  EXPECT_EQ(bk.front(), 14);
  EXPECT_EQ(bk.back(), 52);
  EXPECT_EQ(bk.size(), 39u);
  auto ifft = default_range(p, Knob::kIfft);
  EXPECT_EQ(ifft.front(), 1);
  EXPECT_EQ(ifft.back(), 36);
  SweepOptions o;
  o.below_table = 10;
  o.above_wide = 0;
  EXPECT_EQ(default_range(p, Knob::kIfft, o).front(), 0);
  EXPECT_EQ(default_range(p, Knob::kIfft, o).back(), 30);
  o.above_wide = 20;
  EXPECT_EQ(default_range(p, Knob::kBk, o).back(), 57);
}

TEST(Sweep, SmallRunWithUnlimitedBudget) {
  const auto p = TfheParams::set_i();
  SweepOptions o;
  o.experiment.resamples = 100;
  auto r = sweep_lsb(p, Knob::kIfft, {4, 6}, NoiseBudget::unlimited(), 3, 9, o);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points[0].fractional_bits, 4);
  EXPECT_EQ(r.selected, 4);
  NoiseBudget tight;
  tight.sigma2_total_allowed = 1e-40;
  EXPECT_THROW(sweep_lsb(p, Knob::kIfft, {4, 6}, tight, 3, 9, o), NoCandidate);
}

TEST(Parse, KnobAndMetric) {
  EXPECT_EQ(parse_knob("BK"), Knob::kBk);
  EXPECT_EQ(parse_knob("FFT"), Knob::kFft);
  EXPECT_EQ(parse_knob("IFFT"), Knob::kIfft);
  EXPECT_THROW(parse_knob("fft2"), std::invalid_argument);
  EXPECT_EQ(parse_noise_metric("phase"), NoiseMetric::kPhase);
  EXPECT_EQ(to_string(NoiseMetric::kCoefficient), "coefficient");
  EXPECT_THROW(parse_noise_metric("x"), std::invalid_argument);
}

}  // namespace
}  // namespace fxtfhe

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fxtfhe/fixed_point.hpp"
#include "fxtfhe/negacyclic_fft.hpp"
#include "fxtfhe/noise_lab.hpp"
#include "fxtfhe/params.hpp"
#include "fxtfhe/pbs.hpp"

namespace fxtfhe {

// One datapath configuration; no formats means the double-precision path.
struct ApproxConfig {
  std::optional<DatapathFormats> formats;
  RoundingMode rounding = kDefaultDatapathRounding;
  std::optional<ScalingSchedule> schedule;
  std::string label;

  static ApproxConfig reference();
  static ApproxConfig fixed(const DatapathFormats& formats, std::string label = {});
  TransformPlans plans(int N) const;
};

// kCoefficient: squared difference of every accumulator coefficient.
// kPhase: squared difference of the decryption phase b - <a, s>.
enum class NoiseMetric { kCoefficient, kPhase };
NoiseMetric parse_noise_metric(std::string_view s);
std::string to_string(NoiseMetric m);

struct NoiseExperimentOptions {
  int sampled_iterations = 2;  // CMUX steps compared per trial
  int resamples = 1000;
  int jobs = 1;
  PbsOptions pbs;
};

// Approximation noise accumulated over one blind rotation, torus units^2.
struct NoiseEstimate {
  std::string label;
  double coefficient_variance = 0.0;
  double coefficient_ci_low = 0.0;
  double coefficient_ci_high = 0.0;
  double phase_variance = 0.0;
  double phase_ci_low = 0.0;
  double phase_ci_high = 0.0;
  int trials = 0;
  std::uint64_t overflow_count = 0;

  double variance(NoiseMetric m) const { return m == NoiseMetric::kPhase ? phase_variance : coefficient_variance; }
  double ci_low(NoiseMetric m) const { return m == NoiseMetric::kPhase ? phase_ci_low : coefficient_ci_low; }
  double ci_high(NoiseMetric m) const { return m == NoiseMetric::kPhase ? phase_ci_high : coefficient_ci_high; }
};

// Paired measurement. Each trial bootstraps a fresh ciphertext on the
// reference path; at a few random iterations i >= 1 the external-product
// input is fed to every configuration and to the reference, and the
// differences are scaled by n / sampled_iterations.
class OutputNoiseExperiment {
 public:
  OutputNoiseExperiment(TfheParams params, std::uint64_t seed, NoiseExperimentOptions options = {});

  std::vector<NoiseEstimate> run(const std::vector<ApproxConfig>& configs, int trials) const;
  const TfheParams& params() const { return params_; }

 private:
  TfheParams params_;
  std::uint64_t seed_;
  NoiseExperimentOptions options_;
};

NoiseEstimate measure_output_noise(const TfheParams& params, const ApproxConfig& config, int trials,
                                   std::uint64_t seed, const NoiseExperimentOptions& options = {});

enum class Knob { kBk, kFft, kIfft };
Knob parse_knob(std::string_view s);
std::string to_string(Knob k);

struct SweepPoint {
  Knob knob = Knob::kBk;
  int fractional_bits = 0;
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int trials = 0;
};

struct SweepOptions {
  NoiseMetric metric = NoiseMetric::kCoefficient;
  int below_table = 5;   // lowest candidate = preset fractional bits - below_table
  int wide_width = 53;   // width of the knobs not being swept
  // The swept knob continues this many bits past wide_width so the curve
  // reaches the floor set by the other knobs.
  int above_wide = 6;
  NoiseExperimentOptions experiment;
};

struct SweepResult {
  Knob knob = Knob::kBk;
  NoiseMetric metric = NoiseMetric::kCoefficient;
  double per_source_budget = 0.0;
  std::vector<SweepPoint> points;  // ascending fractional bits
  std::optional<int> selected;
};

class NoCandidate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Swept knob at preset integer bits and the given fractional bits; the
// other two at wide_width with preset integer bits.
DatapathFormats sweep_formats(const TfheParams& params, Knob knob, int fractional_bits, int wide_width = 53);
std::vector<int> default_range(const TfheParams& params, Knob knob, const SweepOptions& options = {});

SweepResult sweep_lsb(const TfheParams& params, Knob knob, const std::vector<int>& range, const NoiseBudget& budget,
                      int trials, std::uint64_t seed, const SweepOptions& options = {});
// All three knobs over their default ranges in one paired run.
std::vector<SweepResult> sweep_all(const TfheParams& params, const NoiseBudget& budget, int trials,
                                   std::uint64_t seed, const SweepOptions& options = {});

// Smallest fractional-bit count of `knob` whose variance is within budget.
int select_fractional_bits(std::span<const SweepPoint> points, Knob knob, double per_source_budget);

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);
std::vector<SweepPoint> read_sweep_csv(std::istream& in);
// {"params":..,"metric":..,"per_source_budget":..,"selected":{"BK":19,..}}
std::string selection_json(const TfheParams& params, NoiseMetric metric, double per_source_budget,
                           std::span<const SweepPoint> points);

}  // namespace fxtfhe

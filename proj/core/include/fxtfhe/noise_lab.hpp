#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fxtfhe/negacyclic_fft.hpp"
#include "fxtfhe/params.hpp"
#include "fxtfhe/random.hpp"

namespace fxtfhe {

// Natural log of erfc(x), usable far into the tail (x up to ~1e150).
double log_erfc(double x);
// x with erfc(x) = exp(log_target); requires log_target < log(2).
double inverse_erfc_log(double log_target);
double inverse_erfc(double target);

// Overflow probability 1 - erf(2^p / (2 sqrt(2) sigma)) of a word whose
// range is [-2^{p-1}, 2^{p-1}).
double overflow_probability(double sigma, int p_msb);
double log2_overflow_probability(double sigma, int p_msb);

inline constexpr int kMinMsb = -64;

// Smallest p >= min_msb with overflow_probability(sigma, p) <= target.
int select_msb(double sigma, double p_of_target, int min_msb = kMinMsb);

struct NoiseBudget {
  double sigma2_total_allowed = 0.0;
  double approx_fraction = 0.5;
  double per_source_fraction = 1.0 / 3.0;

  void validate() const;
  double approx_budget() const { return sigma2_total_allowed * approx_fraction; }
  double per_source_budget() const { return approx_budget() * per_source_fraction; }
  static NoiseBudget unlimited();
};

// Largest output stddev whose two-sided Gaussian tail beyond the bucket
// half-width 2^{-(p+3)} is at most target_failure_prob.
NoiseBudget total_budget(const TfheParams& params, double target_failure_prob = 0x1.0p-32, int message_bits = 1);
NoiseBudget total_budget_for_half_width(double half_width, double target_failure_prob);

// Variance of one external product with a fresh-noise TGGSW of message m on a
// TGLWE input of variance var_in with uniform digits.
double external_product_variance(const TfheParams& params, int m, double var_in, double key_weight_fraction = 0.5);
// Blind rotation plus sample extraction, with sum_s = number of ones in the
// TLWE key (default n/2).
double pbs_output_variance(const TfheParams& params, std::optional<double> sum_s = std::nullopt);
// Total allowed = 2 x inherent PBS variance, so the approximation share
// equals the inherent noise.
NoiseBudget inherent_budget(const TfheParams& params);

struct VarianceReport {
  std::string tap;
  double variance = 0.0;
  double mean = 0.0;
  std::uint64_t count = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int trials = 0;
};

// Generates random inputs and pushes datapath values to a sink.
class Workload {
 public:
  virtual ~Workload() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> taps() const = 0;
  virtual void run_trial(Prng& prng, TapSink& sink) = 0;
};

enum class FftInput { kZero, kUniformTorus, kDigits };

// One forward transform per trial; taps fft.input .. fft.output.
std::unique_ptr<Workload> make_fft_workload(FftPlan forward, FftInput input, int beta = 8);
// Full fixed-point bootstraps of random Boolean ciphertexts.
std::unique_ptr<Workload> make_bootstrap_workload(const TfheParams& params, const TransformPlans& plans,
                                                  std::uint64_t key_seed);

// Pooled unbiased variance over all recorded values, with a 95% CI from
// bootstrap resampling over trials. Requires trials >= 100.
VarianceReport measure_variance(const std::string& tap, Workload& workload, int trials, std::uint64_t seed);

// 95% percentile interval of the mean from bootstrap resampling.
std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& per_trial, std::uint64_t seed,
                                            int resamples = 1000);

}  // namespace fxtfhe

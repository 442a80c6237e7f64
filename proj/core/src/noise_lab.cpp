#include "fxtfhe/noise_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/gadget.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/pbs.hpp"

namespace fxtfhe {

// ---- tail functions -------------------------------------------------------

double log_erfc(double x) {
  if (std::isnan(x)) return x;
  if (x <= 6.0) return std::log(std::erfc(x));
  // erfc(x) = exp(-x^2) / (x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv;
    if (std::fabs(next) >= std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-18) break;
  }
  return -x * x - std::log(x) - 0.5 * std::log(std::numbers::pi) + std::log(sum);
}

double inverse_erfc_log(double log_target) {
  if (std::isnan(log_target)) throw std::invalid_argument("target is NaN");
  if (log_target >= std::log(2.0)) throw std::invalid_argument("erfc target must be below 2");
  double lo = -10.0;
  double hi = std::sqrt(std::max(1.0, -log_target)) + 2.0;
  // log_erfc is decreasing.
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (log_erfc(mid) > log_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double inverse_erfc(double target) {
  if (!(target > 0.0)) throw std::invalid_argument("erfc target must be positive");
  return inverse_erfc_log(std::log(target));
}

double overflow_probability(double sigma, int p_msb) {
  return std::exp(log_erfc(std::ldexp(1.0, p_msb) / (2.0 * std::numbers::sqrt2 * sigma)));
}

double log2_overflow_probability(double sigma, int p_msb) {
  return log_erfc(std::ldexp(1.0, p_msb) / (2.0 * std::numbers::sqrt2 * sigma)) / std::numbers::ln2;
}

int select_msb(double sigma, double p_of_target, int min_msb) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive and finite");
  if (!(p_of_target > 0.0)) throw std::invalid_argument("overflow target must be positive");
  if (p_of_target >= 1.0) return min_msb;
  const double x = inverse_erfc(p_of_target);
  // Need 2^p >= 2 sqrt(2) sigma x; frexp keeps the result exact under
  // power-of-two changes of sigma.
  const double arg = 2.0 * std::numbers::sqrt2 * x * sigma;
  int e = 0;
  const double mant = std::frexp(arg, &e);
  const int p = mant == 0.5 ? e - 1 : e;
  return std::max(p, min_msb);
}

// ---- budgets --------------------------------------------------------------

void NoiseBudget::validate() const {
  if (!(sigma2_total_allowed > 0.0)) throw std::invalid_argument("total noise budget must be positive");
  if (!(approx_fraction > 0.0 && approx_fraction <= 1.0) || !(per_source_fraction > 0.0 && per_source_fraction <= 1.0)) {
    throw std::invalid_argument("budget fractions must be in (0, 1]");
  }
}

NoiseBudget NoiseBudget::unlimited() {
  NoiseBudget b;
  b.sigma2_total_allowed = std::numeric_limits<double>::infinity();
  return b;
}

NoiseBudget total_budget_for_half_width(double half_width, double target_failure_prob) {
  if (!(half_width > 0.0)) throw std::invalid_argument("half width must be positive");
  if (!(target_failure_prob > 0.0)) throw std::invalid_argument("failure target must be positive");
  if (target_failure_prob >= 1.0) return NoiseBudget::unlimited();
  const double x = inverse_erfc(target_failure_prob);
  const double sigma = half_width / (std::numbers::sqrt2 * x);
  NoiseBudget b;
  b.sigma2_total_allowed = sigma * sigma;
  return b;
}

NoiseBudget total_budget(const TfheParams& params, double target_failure_prob, int message_bits) {
  params.validate();
  if (message_bits < 1) throw std::invalid_argument("message bits must be >= 1");
  return total_budget_for_half_width(std::ldexp(1.0, -(message_bits + 3)), target_failure_prob);
}

namespace {

double digit_second_moment(int beta) {
  const double base = std::ldexp(1.0, beta);
  return (base * base + 2.0) / 12.0;
}

double rounding_variance(const TfheParams& p) {
  const double q = std::ldexp(1.0, -p.l * p.beta);
  return q * q / 12.0;
}

}  // namespace

double external_product_variance(const TfheParams& p, int m, double var_in, double key_weight_fraction) {
  const double rows = (p.k + 1.0) * p.l;
  const double key_term = 1.0 + p.k * p.N * key_weight_fraction;
  return rows * p.N * digit_second_moment(p.beta) * p.sigma_tglwe * p.sigma_tglwe +
         static_cast<double>(m) * m * (key_term * rounding_variance(p) + var_in);
}

double pbs_output_variance(const TfheParams& p, std::optional<double> sum_s) {
  const double ones = sum_s.value_or(p.n / 2.0);
  const double rows = (p.k + 1.0) * p.l;
  const double bk_term = p.n * rows * p.N * digit_second_moment(p.beta) * p.sigma_tglwe * p.sigma_tglwe;
  const double rounding_term = ones * (1.0 + p.k * p.N / 2.0) * rounding_variance(p);
  return bk_term + rounding_term;
}

NoiseBudget inherent_budget(const TfheParams& params) {
  NoiseBudget b;
  b.sigma2_total_allowed = 2.0 * pbs_output_variance(params);
  return b;
}

// ---- tap workloads --------------------------------------------------------

namespace {

std::vector<std::string> fft_taps(const char* prefix, int stages, bool with_twist) {
  std::vector<std::string> t{std::string(prefix) + ".input"};
  if (with_twist) t.push_back(std::string(prefix) + ".twisted");
  for (int s = 0; s < stages; ++s) t.push_back(std::string(prefix) + ".stage" + std::to_string(s));
  t.push_back(std::string(prefix) + ".output");
  return t;
}

class FftWorkload final : public Workload {
 public:
  FftWorkload(FftPlan plan, FftInput input, int beta) : plan_(std::move(plan)), input_(input), beta_(beta) {}

  std::string name() const override { return "fft"; }
  std::vector<std::string> taps() const override { return fft_taps("fft", plan_.stages(), true); }

  void run_trial(Prng& prng, TapSink& sink) override {
    const auto n = static_cast<std::size_t>(plan_.ring_degree());
    std::vector<double> x(n, 0.0);
    if (input_ == FftInput::kUniformTorus) {
      for (auto& v : x) v = torus_to_double(prng.next_u32());
    } else if (input_ == FftInput::kDigits) {
      const std::uint64_t base = 1ULL << beta_;
      for (auto& v : x) v = static_cast<double>(static_cast<std::int64_t>(prng.uniform_below(base)) -
                                                static_cast<std::int64_t>(base / 2));
    }
    OverflowPolicy policy;
    fft_forward(x, plan_, policy, &sink);
  }

 private:
  FftPlan plan_;
  FftInput input_;
  int beta_;
};

class BootstrapWorkload final : public Workload {
 public:
  BootstrapWorkload(const TfheParams& params, const TransformPlans& plans, std::uint64_t key_seed)
      : params_(params), plans_(plans), keys_(keygen(params, key_seed)) {
    bk_ = BootstrappingKey::generate(keys_, params_, plans_, key_seed);
    lut_ = constant_lut(encode_bool(true), params_.N);
  }

  std::string name() const override { return "bootstrap"; }

  std::vector<std::string> taps() const override {
    auto t = fft_taps("fft", plans_.forward.stages(), true);
    t.push_back("mac.output");
    auto inv = fft_taps("ifft", plans_.inverse.stages(), false);
    t.insert(t.end(), inv.begin(), inv.end());
    return t;
  }

  void run_trial(Prng& prng, TapSink& sink) override {
    const bool bit = prng.next_bit() != 0;
    TlweCiphertext ct = tlwe_encrypt(encode_bool(bit), keys_.tlwe_key, params_.sigma_tlwe, prng);
    OverflowPolicy policy;
    blind_rotate(ct, lut_, bk_, plans_, policy, {}, {}, &sink);
  }

 private:
  TfheParams params_;
  TransformPlans plans_;
  SecretKeys keys_;
  BootstrappingKey bk_;
  TestPolynomial lut_;
};

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
  double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
};

class SingleTapSink final : public TapSink {
 public:
  explicit SingleTapSink(std::string tap) : tap_(std::move(tap)) {}
  void record(std::string_view tap, std::span<const double> values) override {
    if (tap != tap_) return;
    for (double v : values) moments.add(v);
  }
  Moments moments;

 private:
  std::string tap_;
};

}  // namespace

std::unique_ptr<Workload> make_fft_workload(FftPlan forward, FftInput input, int beta) {
  if (forward.direction() != FftDirection::kForward) throw std::invalid_argument("workload needs a forward plan");
  return std::make_unique<FftWorkload>(std::move(forward), input, beta);
}

std::unique_ptr<Workload> make_bootstrap_workload(const TfheParams& params, const TransformPlans& plans,
                                                  std::uint64_t key_seed) {
  return std::make_unique<BootstrapWorkload>(params, plans, key_seed);
}

std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& per_trial, std::uint64_t seed,
                                            int resamples) {
  if (per_trial.empty()) return {0.0, 0.0};
  Prng prng = Prng::stream(seed, "bootstrap-ci");
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < per_trial.size(); ++i) s += per_trial[prng.uniform_below(per_trial.size())];
    m = s / static_cast<double>(per_trial.size());
  }
  std::sort(means.begin(), means.end());
  auto pick = [&](double q) { return means[static_cast<std::size_t>(q * (means.size() - 1) + 0.5)]; };
  return {pick(0.025), pick(0.975)};
}

VarianceReport measure_variance(const std::string& tap, Workload& workload, int trials, std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("measure_variance needs at least 100 trials");
  auto names = workload.taps();
  if (std::find(names.begin(), names.end(), tap) == names.end()) {
    throw std::invalid_argument("unknown tap '" + tap + "' for workload " + workload.name());
  }
  std::vector<Moments> per_trial(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Prng prng = Prng::stream(seed, "workload", static_cast<std::uint64_t>(t));
    SingleTapSink sink(tap);
    workload.run_trial(prng, sink);
    per_trial[static_cast<std::size_t>(t)] = sink.moments;
  }
  Moments total;
  for (const auto& m : per_trial) total.merge(m);
  VarianceReport r;
  r.tap = tap;
  r.variance = total.variance();
  r.mean = total.mean;
  r.count = static_cast<std::uint64_t>(total.count);
  r.trials = trials;
  // Resample whole trials.
  Prng prng = Prng::stream(seed, "variance-ci");
  std::vector<double> vars(1000);
  for (auto& v : vars) {
    Moments m;
    for (int t = 0; t < trials; ++t) m.merge(per_trial[prng.uniform_below(static_cast<std::uint64_t>(trials))]);
    v = m.variance();
  }
  std::sort(vars.begin(), vars.end());
  r.ci_low = vars[25];
  r.ci_high = vars[974];
  return r;
}

}  // namespace fxtfhe

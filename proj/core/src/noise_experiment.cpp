#include "fxtfhe/noise_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/gadget.hpp"
#include "fxtfhe/keys.hpp"

namespace fxtfhe {

ApproxConfig ApproxConfig::reference() {
  ApproxConfig c;
  c.label = "reference";
  return c;
}

ApproxConfig ApproxConfig::fixed(const DatapathFormats& formats, std::string label) {
  ApproxConfig c;
  c.formats = formats;
  c.label = label.empty() ? formats.to_string() : std::move(label);
  return c;
}

TransformPlans ApproxConfig::plans(int N) const {
  if (!formats) return TransformPlans::reference(N);
  return TransformPlans::fixed(N, *formats, rounding, schedule);
}

NoiseMetric parse_noise_metric(std::string_view s) {
  if (s == "coefficient") return NoiseMetric::kCoefficient;
  if (s == "phase") return NoiseMetric::kPhase;
  throw std::invalid_argument("unknown noise metric '" + std::string(s) + "'");
}

std::string to_string(NoiseMetric m) { return m == NoiseMetric::kPhase ? "phase" : "coefficient"; }

namespace {

double wrap(double x) { return x - std::nearbyint(x); }

// Negacyclic product of a real polynomial with a binary one.
void sub_binary_product(std::vector<double>& out, const std::vector<double>& a, const std::vector<std::uint8_t>& s) {
  const std::size_t n = a.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (!s[t]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = j + t;
      if (idx < n) {
        out[idx] -= a[j];
      } else {
        out[idx - n] += a[j];
      }
    }
  }
}

struct TrialResult {
  std::vector<double> coefficient;  // per config
  std::vector<double> phase;
  std::vector<std::uint64_t> overflows;
};

}  // namespace

OutputNoiseExperiment::OutputNoiseExperiment(TfheParams params, std::uint64_t seed, NoiseExperimentOptions options)
    : params_(std::move(params)), seed_(seed), options_(options) {
  params_.validate();
  if (options_.sampled_iterations < 1 || options_.sampled_iterations > params_.n - 1) {
    throw std::invalid_argument("sampled iterations must be in [1, n - 1]");
  }
}

std::vector<NoiseEstimate> OutputNoiseExperiment::run(const std::vector<ApproxConfig>& configs, int trials) const {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  const int N = params_.N;
  const auto k = static_cast<std::size_t>(params_.k);
  const SecretKeys keys = keygen(params_, seed_);
  const TransformPlans ref_plans = TransformPlans::reference(N);
  const BootstrappingKey ref_bk = BootstrappingKey::generate(keys, params_, ref_plans, seed_);
  const GadgetParams gadget{params_.beta, params_.l, options_.pbs.gadget_tie};
  const TestPolynomial lut = constant_lut(encode_bool(true), N);

  std::vector<TransformPlans> plans;
  std::vector<std::size_t> forward_group;  // configs sharing a forward plan share spectra
  std::vector<std::string> forward_keys;
  for (const auto& c : configs) {
    plans.push_back(c.plans(N));
    const std::string key = plans.back().forward.describe();
    auto it = std::find(forward_keys.begin(), forward_keys.end(), key);
    forward_group.push_back(static_cast<std::size_t>(it - forward_keys.begin()));
    if (it == forward_keys.end()) forward_keys.push_back(key);
  }

  const auto m = static_cast<std::size_t>(options_.sampled_iterations);
  const double scale = static_cast<double>(params_.n) / static_cast<double>(m);
  const double coeffs = static_cast<double>((k + 1) * static_cast<std::size_t>(N));

  auto run_trial = [&](int t) {
    TrialResult res;
    res.coefficient.assign(configs.size(), 0.0);
    res.phase.assign(configs.size(), 0.0);
    res.overflows.assign(configs.size(), 0);
    Prng prng = Prng::stream(seed_, "noise-trial", static_cast<std::uint64_t>(t));
    const bool bit = prng.next_bit() != 0;
    const TlweCiphertext ct = tlwe_encrypt(encode_bool(bit), keys.tlwe_key, params_.sigma_tlwe, prng);
    std::vector<std::size_t> sampled;
    while (sampled.size() < m) {
      // Iteration 0 sees the trivial accumulator; its structured digits are
      // an MSB question, not an LSB one.
      auto i = 1 + static_cast<std::size_t>(prng.uniform_below(static_cast<std::uint64_t>(params_.n - 1)));
      if (std::find(sampled.begin(), sampled.end(), i) == sampled.end()) sampled.push_back(i);
    }

    auto compare = [&](std::size_t iteration, const TglweCiphertext& input) {
      if (std::find(sampled.begin(), sampled.end(), iteration) == sampled.end()) return;
      OverflowPolicy unused;
      const BkEntry& ref_entry = ref_bk.entry(iteration);
      auto ref_cols = mac_columns(decompose_forward(input, ref_plans, gadget, unused), ref_entry, ref_plans, unused);
      std::vector<std::vector<double>> ref_out;
      for (const auto& col : ref_cols) ref_out.push_back(fft_inverse_real(col, ref_plans.inverse, unused));

      std::map<std::size_t, std::vector<FftDomainPoly>> spectra;
      for (std::size_t c = 0; c < configs.size(); ++c) {
        OverflowPolicy policy;
        auto found = spectra.find(forward_group[c]);
        if (found == spectra.end()) {
          found = spectra.emplace(forward_group[c], decompose_forward(input, plans[c], gadget, policy)).first;
        }
        const BkEntry entry = BootstrappingKey::quantize_entry(ref_entry, plans[c], policy);
        auto cols = mac_columns(found->second, entry, plans[c], policy);
        std::vector<std::vector<double>> delta;
        double sq = 0.0;
        for (std::size_t p = 0; p <= k; ++p) {
          auto out = fft_inverse_real(cols[p], plans[c].inverse, policy);
          for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] = wrap(out[j] - ref_out[p][j]);
            sq += out[j] * out[j];
          }
          delta.push_back(std::move(out));
        }
        res.coefficient[c] += sq / coeffs;
        std::vector<double> phase = delta[k];
        for (std::size_t p = 0; p < k; ++p) sub_binary_product(phase, delta[p], keys.tglwe_key[p]);
        double psq = 0.0;
        for (double v : phase) {
          const double w = wrap(v);
          psq += w * w;
        }
        res.phase[c] += psq / static_cast<double>(N);
        res.overflows[c] += policy.count();
      }
    };
    OverflowPolicy policy;
    blind_rotate(ct, lut, ref_bk, ref_plans, policy, options_.pbs, compare);
    for (auto& v : res.coefficient) v *= scale;
    for (auto& v : res.phase) v *= scale;
    return res;
  };

  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  const int jobs = std::max(1, std::min(options_.jobs, trials));
  if (jobs == 1) {
    for (int t = 0; t < trials; ++t) results[static_cast<std::size_t>(t)] = run_trial(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        try {
          for (int t = j; t < trials; t += jobs) results[static_cast<std::size_t>(t)] = run_trial(t);
        } catch (...) {
          errors[static_cast<std::size_t>(j)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<NoiseEstimate> out;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<double> coef;
    std::vector<double> phase;
    NoiseEstimate e;
    e.label = configs[c].label;
    e.trials = trials;
    for (const auto& r : results) {
      coef.push_back(r.coefficient[c]);
      phase.push_back(r.phase[c]);
      e.overflow_count += r.overflows[c];
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    e.coefficient_variance = mean(coef);
    e.phase_variance = mean(phase);
    std::tie(e.coefficient_ci_low, e.coefficient_ci_high) = bootstrap_mean_ci(coef, seed_ + c, options_.resamples);
    std::tie(e.phase_ci_low, e.phase_ci_high) = bootstrap_mean_ci(phase, seed_ + c, options_.resamples);
    out.push_back(std::move(e));
  }
  return out;
}

NoiseEstimate measure_output_noise(const TfheParams& params, const ApproxConfig& config, int trials,
                                   std::uint64_t seed, const NoiseExperimentOptions& options) {
  return OutputNoiseExperiment(params, seed, options).run({config}, trials).front();
}

// ---- sweeps ---------------------------------------------------------------

Knob parse_knob(std::string_view s) {
  if (s == "BK" || s == "bk") return Knob::kBk;
  if (s == "FFT" || s == "fft") return Knob::kFft;
  if (s == "IFFT" || s == "ifft") return Knob::kIfft;
  throw std::invalid_argument("unknown knob '" + std::string(s) + "'");
}

std::string to_string(Knob k) {
  switch (k) {
    case Knob::kBk: return "BK";
    case Knob::kFft: return "FFT";
    case Knob::kIfft: return "IFFT";
  }
  return "?";
}

namespace {

const FixedPointFormat& knob_format(const DatapathFormats& f, Knob k) {
  switch (k) {
    case Knob::kBk: return f.bk;
    case Knob::kFft: return f.fft;
    case Knob::kIfft: return f.ifft;
  }
  return f.bk;
}

}  // namespace

DatapathFormats sweep_formats(const TfheParams& params, Knob knob, int fractional_bits, int wide_width) {
  const DatapathFormats table = DatapathFormats::table3(params);
  auto wide = [&](const FixedPointFormat& f) { return FixedPointFormat::make(f.integer_bits, wide_width - f.integer_bits); };
  FixedPointFormat bk = wide(table.bk);
  FixedPointFormat fft = wide(table.fft);
  FixedPointFormat ifft = wide(table.ifft);
  const int i = knob_format(table, knob).integer_bits;
  const FixedPointFormat swept = FixedPointFormat::make(i, fractional_bits);
  if (knob == Knob::kBk) bk = swept;
  if (knob == Knob::kFft) fft = swept;
  if (knob == Knob::kIfft) ifft = swept;
  return DatapathFormats::make(bk, fft, ifft);
}

std::vector<int> default_range(const TfheParams& params, Knob knob, const SweepOptions& options) {
  const FixedPointFormat& f = knob_format(DatapathFormats::table3(params), knob);
  std::vector<int> r;
  const int top = std::min(options.wide_width + options.above_wide, 64) - f.integer_bits;
  for (int b = std::max(0, f.fractional_bits - options.below_table); b <= top; ++b) {
    r.push_back(b);
  }
  return r;
}

namespace {

std::vector<SweepResult> run_sweeps(const TfheParams& params, const std::vector<std::pair<Knob, std::vector<int>>>& plan,
                                    const NoiseBudget& budget, int trials, std::uint64_t seed,
                                    const SweepOptions& options) {
  std::vector<ApproxConfig> configs;
  for (const auto& [knob, range] : plan) {
    if (range.empty()) throw std::invalid_argument("sweep range is empty");
    for (int b : range) {
      configs.push_back(ApproxConfig::fixed(sweep_formats(params, knob, b, options.wide_width),
                                            to_string(knob) + ":" + std::to_string(b)));
    }
  }
  auto estimates = OutputNoiseExperiment(params, seed, options.experiment).run(configs, trials);
  std::vector<SweepResult> results;
  std::size_t idx = 0;
  for (const auto& [knob, range] : plan) {
    SweepResult r;
    r.knob = knob;
    r.metric = options.metric;
    r.per_source_budget = budget.per_source_budget();
    std::vector<std::pair<int, NoiseEstimate>> pts;
    for (int b : range) pts.emplace_back(b, estimates[idx++]);
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [b, e] : pts) {
      r.points.push_back({knob, b, e.variance(options.metric), e.ci_low(options.metric), e.ci_high(options.metric),
                          e.trials});
    }
    try {
      r.selected = select_fractional_bits(r.points, knob, r.per_source_budget);
    } catch (const NoCandidate&) {
      r.selected.reset();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

SweepResult sweep_lsb(const TfheParams& params, Knob knob, const std::vector<int>& range, const NoiseBudget& budget,
                      int trials, std::uint64_t seed, const SweepOptions& options) {
  budget.validate();
  auto r = run_sweeps(params, {{knob, range}}, budget, trials, seed, options).front();
  if (!r.selected) throw NoCandidate("no " + to_string(knob) + " fractional-bit count meets the noise budget");
  return r;
}

std::vector<SweepResult> sweep_all(const TfheParams& params, const NoiseBudget& budget, int trials,
                                   std::uint64_t seed, const SweepOptions& options) {
  budget.validate();
  std::vector<std::pair<Knob, std::vector<int>>> plan;
  for (Knob k : {Knob::kBk, Knob::kFft, Knob::kIfft}) plan.emplace_back(k, default_range(params, k, options));
  return run_sweeps(params, plan, budget, trials, seed, options);
}

int select_fractional_bits(std::span<const SweepPoint> points, Knob knob, double per_source_budget) {
  std::optional<int> best;
  for (const auto& p : points) {
    if (p.knob != knob || p.variance > per_source_budget) continue;
    if (!best || p.fractional_bits < *best) best = p.fractional_bits;
  }
  if (!best) throw NoCandidate("no " + to_string(knob) + " fractional-bit count meets the noise budget");
  return *best;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "knob,fractional_bits,variance,ci_low,ci_high,trials\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& p : points) {
    line.str("");
    line << to_string(p.knob) << ',' << p.fractional_bits << ',' << p.variance << ',' << p.ci_low << ','
         << p.ci_high << ',' << p.trials << '\n';
    out << line.str();
  }
}

std::vector<SweepPoint> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("knob,fractional_bits", 0) != 0) {
    throw std::runtime_error("sweep CSV header missing");
  }
  std::vector<SweepPoint> points;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw std::runtime_error("sweep CSV line " + std::to_string(line_no) + ": expected 6 fields");
    try {
      SweepPoint p;
      p.knob = parse_knob(cells[0]);
      p.fractional_bits = std::stoi(cells[1]);
      p.variance = std::stod(cells[2]);
      p.ci_low = std::stod(cells[3]);
      p.ci_high = std::stod(cells[4]);
      p.trials = std::stoi(cells[5]);
      points.push_back(p);
    } catch (const std::logic_error& e) {
      throw std::runtime_error("sweep CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return points;
}

std::string selection_json(const TfheParams& params, NoiseMetric metric, double per_source_budget,
                           std::span<const SweepPoint> points) {
  nlohmann::ordered_json j;
  j["params"] = params.name;
  j["metric"] = to_string(metric);
  j["per_source_budget"] = per_source_budget;
  nlohmann::ordered_json sel = nlohmann::ordered_json::object();
  const DatapathFormats table = DatapathFormats::table3(params);
  for (Knob k : {Knob::kBk, Knob::kFft, Knob::kIfft}) {
    if (std::none_of(points.begin(), points.end(), [&](const SweepPoint& p) { return p.knob == k; })) continue;
    try {
      const int f = select_fractional_bits(points, k, per_source_budget);
      const int i = knob_format(table, k).integer_bits;
      sel[to_string(k)] = {{"fractional_bits", f}, {"format", FixedPointFormat::make(i, f).to_string()}};
    } catch (const NoCandidate&) {
      sel[to_string(k)] = nullptr;
    }
  }
  j["selected"] = sel;
  return j.dump(2);
}

}  // namespace fxtfhe

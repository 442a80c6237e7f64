#include "fxtfhe/pbs.hpp"

#include <bit>
#include <stdexcept>

namespace fxtfhe {

Torus32 encode_message(std::uint32_t m, int message_bits) {
  if (message_bits < 1 || message_bits > 30) throw std::invalid_argument("message bits must be in [1, 30]");
  const std::uint64_t center = 2ULL * m + 1;
  return static_cast<Torus32>(center << (32 - message_bits - 1));
}

std::uint32_t decode_message(Torus32 phase, int message_bits) {
  if (message_bits < 1 || message_bits > 30) throw std::invalid_argument("message bits must be in [1, 30]");
  return phase >> (32 - message_bits);
}

Torus32 encode_bool(bool bit) { return bit ? (1U << 29) : static_cast<Torus32>(-(1 << 29)); }

bool decode_bool(Torus32 phase) { return static_cast<std::int32_t>(phase) > 0; }

TestPolynomial build_lut(const std::function<Torus32(std::uint32_t)>& f, int N, int message_bits) {
  if (message_bits < 1) throw std::invalid_argument("message bits must be >= 1");
  if ((1LL << message_bits) > 2LL * N) throw std::invalid_argument("too many message bits for the ring degree");
  TestPolynomial lut{TorusPolynomial(static_cast<std::size_t>(N))};
  for (int i = 0; i < N; ++i) {
    const auto m = static_cast<std::uint32_t>((static_cast<std::uint64_t>(i) << message_bits) / (2ULL * N));
    lut.F[static_cast<std::size_t>(i)] = f(m);
  }
  return lut;
}

TestPolynomial constant_lut(Torus32 value, int N) {
  return build_lut([value](std::uint32_t) { return value; }, N, 1);
}

TestPolynomial identity_lut(int N, int message_bits) {
  return build_lut([message_bits](std::uint32_t m) { return encode_message(m, message_bits); }, N, message_bits);
}

std::size_t LutTable::add(TestPolynomial lut) {
  if (luts_.size() >= capacity_) throw std::length_error("LUT table is full");
  luts_.push_back(std::move(lut));
  return luts_.size() - 1;
}

std::size_t rotation_amount(Torus32 a, int N) {
  const int log2n = std::countr_zero(static_cast<unsigned>(2 * N));
  const std::uint32_t truncated = a >> (31 - log2n);
  return ((truncated + 1) >> 1) & static_cast<std::uint32_t>(2 * N - 1);
}

namespace {

void check_compatible(const BkEntry& entry, const TransformPlans& plans, std::size_t k, std::size_t l) {
  if (entry.columns != k + 1 || entry.rows() != (k + 1) * l) throw std::invalid_argument("BK entry shape mismatch");
  if (entry.polys.front().is_fixed() != plans.is_fixed()) {
    throw std::invalid_argument("BK arithmetic does not match the transform plans");
  }
}

}  // namespace

std::vector<FftDomainPoly> decompose_forward(const TglweCiphertext& c, const TransformPlans& plans,
                                             const GadgetParams& gadget, OverflowPolicy& policy, TapSink* taps) {
  std::vector<FftDomainPoly> spectra;
  spectra.reserve((c.k() + 1) * static_cast<std::size_t>(gadget.l));
  for (std::size_t p = 0; p <= c.k(); ++p) {
    auto digits = gadget_decompose(c.component(p), gadget);
    for (const auto& d : digits) spectra.push_back(fft_forward(d, plans.forward, policy, taps));
  }
  return spectra;
}

std::vector<FftDomainPoly> mac_columns(const std::vector<FftDomainPoly>& digit_spectra, const BkEntry& entry,
                                       const TransformPlans& plans, OverflowPolicy& policy, TapSink* taps) {
  if (digit_spectra.size() != entry.rows()) throw std::invalid_argument("digit count does not match BK rows");
  std::vector<FftDomainPoly> cols;
  cols.reserve(entry.columns);
  for (std::size_t c = 0; c < entry.columns; ++c) {
    FftDomainPoly acc = plans.zero_accumulator();
    for (std::size_t r = 0; r < entry.rows(); ++r) {
      pointwise_mac(acc, digit_spectra[r], entry.at(r, c), plans.datapath_rounding, policy);
    }
    if (taps) {
      std::vector<double> flat;
      flat.reserve(2 * acc.size());
      for (std::size_t i = 0; i < acc.size(); ++i) {
        cplx v = acc.stored(i);
        flat.push_back(v.real());
        flat.push_back(v.imag());
      }
      taps->record("mac.output", flat);
    }
    cols.push_back(std::move(acc));
  }
  return cols;
}

TglweCiphertext external_product(const TglweCiphertext& c, const BkEntry& entry, const TransformPlans& plans,
                                 const GadgetParams& gadget, OverflowPolicy& policy, TapSink* taps) {
  check_compatible(entry, plans, c.k(), static_cast<std::size_t>(gadget.l));
  auto spectra = decompose_forward(c, plans, gadget, policy, taps);
  auto cols = mac_columns(spectra, entry, plans, policy, taps);
  TglweCiphertext out;
  out.a.reserve(c.k());
  for (std::size_t p = 0; p < c.k(); ++p) out.a.push_back(fft_inverse(cols[p], plans.inverse, policy, taps));
  out.b = fft_inverse(cols[c.k()], plans.inverse, policy, taps);
  return out;
}

namespace {

GadgetParams gadget_of(const TfheParams& params, const PbsOptions& options) {
  return {params.beta, params.l, options.gadget_tie};
}

void round_to_datapath(TglweCiphertext& acc, const GadgetParams& g) {
  for (std::size_t p = 0; p <= acc.k(); ++p) {
    for (auto& v : acc.component(p)) v = gadget_round(v, g);
  }
}

// One blind-rotation step; skips the external product when its input is zero.
void rotate_step(TglweCiphertext& acc, std::size_t iteration, Torus32 a_i, const BkEntry& entry,
                 const TransformPlans& plans, const GadgetParams& gadget, OverflowPolicy& policy,
                 const PbsOptions& options, const CmuxObserver& observer, TapSink* taps) {
  const std::size_t r = rotation_amount(a_i, static_cast<int>(acc.degree()));
  TglweCiphertext diff = monomial_mul(acc, r) - acc;
  if (observer) observer(iteration, diff);
  if (r != 0) add_to(acc, external_product(diff, entry, plans, gadget, policy, taps));
  if (options.native_datapath) round_to_datapath(acc, gadget);
}

TglweCiphertext initial_accumulator(const TlweCiphertext& ct, const TestPolynomial& F, std::size_t k) {
  const std::size_t two_n = 2 * F.F.size();
  const std::size_t rb = rotation_amount(ct.b, static_cast<int>(F.F.size()));
  return monomial_mul(F.as_ciphertext(k), (two_n - rb) % two_n);
}

}  // namespace

TglweCiphertext cmux(const TglweCiphertext& acc, const BkEntry& entry, Torus32 a_i, const TransformPlans& plans,
                     const GadgetParams& gadget, OverflowPolicy& policy, TapSink* taps) {
  const std::size_t r = rotation_amount(a_i, static_cast<int>(acc.degree()));
  TglweCiphertext diff = monomial_mul(acc, r) - acc;
  return acc + external_product(diff, entry, plans, gadget, policy, taps);
}

TglweCiphertext blind_rotate(const TlweCiphertext& ct, const TestPolynomial& F, const BootstrappingKey& bk,
                             const TransformPlans& plans, OverflowPolicy& policy, const PbsOptions& options,
                             const CmuxObserver& observer, TapSink* taps) {
  const TfheParams& params = bk.params();
  if (ct.dim() != bk.size()) throw std::invalid_argument("ciphertext dimension does not match the bootstrapping key");
  if (F.F.size() != static_cast<std::size_t>(params.N)) throw std::invalid_argument("test polynomial degree");
  const GadgetParams gadget = gadget_of(params, options);
  TglweCiphertext acc = initial_accumulator(ct, F, static_cast<std::size_t>(params.k));
  for (std::size_t i = 0; i < bk.size(); ++i) {
    rotate_step(acc, i, ct.a[i], bk.entry(i), plans, gadget, policy, options, observer, taps);
  }
  return acc;
}

std::vector<TlweCiphertext> bootstrap(const PbsBatch& batch, const BootstrappingKey& bk, const LutTable& luts,
                                      const TransformPlans& plans, BootstrapReport* report,
                                      const PbsOptions& options, TapSink* taps) {
  const std::size_t b = batch.inputs.size();
  if (b == 0) throw std::invalid_argument("empty batch");
  if (!batch.lut_index.empty() && batch.lut_index.size() != b) throw std::invalid_argument("LUT index count");
  const TfheParams& params = bk.params();
  const GadgetParams gadget = gadget_of(params, options);
  OverflowPolicy policy;
  std::vector<TglweCiphertext> accs;
  accs.reserve(b);
  for (std::size_t c = 0; c < b; ++c) {
    if (batch.inputs[c].dim() != bk.size()) {
      throw std::invalid_argument("ciphertext dimension does not match the bootstrapping key");
    }
    const std::size_t idx = batch.lut_index.empty() ? 0 : batch.lut_index[c];
    accs.push_back(initial_accumulator(batch.inputs[c], luts.at(idx), static_cast<std::size_t>(params.k)));
  }
  std::vector<std::uint64_t> reads(bk.size(), 0);
  for (std::size_t i = 0; i < bk.size(); ++i) {
    const BkEntry& entry = bk.entry(i);
    ++reads[i];
    for (std::size_t c = 0; c < b; ++c) {
      rotate_step(accs[c], i, batch.inputs[c].a[i], entry, plans, gadget, policy, options, {}, taps);
    }
  }
  std::vector<TlweCiphertext> out;
  out.reserve(b);
  for (const auto& acc : accs) out.push_back(sample_extract(acc));
  if (report) {
    report->overflow_count = policy.count();
    report->entry_reads = std::move(reads);
    report->batch_size = b;
  }
  return out;
}

TlweCiphertext programmable_bootstrap(const TlweCiphertext& ct, const TestPolynomial& F, const BootstrappingKey& bk,
                                      const TransformPlans& plans, OverflowPolicy& policy,
                                      const PbsOptions& options) {
  return sample_extract(blind_rotate(ct, F, bk, plans, policy, options));
}

BoolGate parse_bool_gate(std::string_view name) {
  if (name == "nand") return BoolGate::kNand;
  if (name == "and") return BoolGate::kAnd;
  if (name == "or") return BoolGate::kOr;
  if (name == "xor") return BoolGate::kXor;
  throw std::invalid_argument("unknown gate '" + std::string(name) + "'");
}

std::string to_string(BoolGate g) {
  switch (g) {
    case BoolGate::kNand: return "nand";
    case BoolGate::kAnd: return "and";
    case BoolGate::kOr: return "or";
    case BoolGate::kXor: return "xor";
  }
  return "?";
}

TlweCiphertext gate(BoolGate op, const TlweCiphertext& c1, const TlweCiphertext& c2, const BootstrappingKey& bk,
                    const TransformPlans& plans, OverflowPolicy& policy, const PbsOptions& options) {
  const std::size_t n = c1.dim();
  TlweCiphertext combined;
  switch (op) {
    case BoolGate::kNand: combined = tlwe_trivial(1U << 29, n) - c1 - c2; break;
    case BoolGate::kAnd: combined = tlwe_trivial(static_cast<Torus32>(-(1 << 29)), n) + c1 + c2; break;
    case BoolGate::kOr: combined = tlwe_trivial(1U << 29, n) + c1 + c2; break;
    case BoolGate::kXor: {
      TlweCiphertext sum = c1 + c2;
      combined = tlwe_trivial(1U << 30, n) + sum + sum;
      break;
    }
  }
  return programmable_bootstrap(combined, constant_lut(1U << 29, bk.params().N), bk, plans, policy, options);
}

TlweCiphertext gate_nand(const TlweCiphertext& c1, const TlweCiphertext& c2, const BootstrappingKey& bk,
                         const TransformPlans& plans, OverflowPolicy& policy, const PbsOptions& options) {
  TlweCiphertext combined = tlwe_trivial(1U << 29, c1.dim()) - c1 - c2;
  return programmable_bootstrap(combined, constant_lut(1U << 29, bk.params().N), bk, plans, policy, options);
}

}  // namespace fxtfhe

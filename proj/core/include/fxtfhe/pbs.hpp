#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/ciphertext.hpp"
#include "fxtfhe/gadget.hpp"
#include "fxtfhe/negacyclic_fft.hpp"

namespace fxtfhe {

// Trivial TGLWE (a = 0, b = F) programmed with a lookup table.
struct TestPolynomial {
  TorusPolynomial F;

  TglweCiphertext as_ciphertext(std::size_t k) const { return TglweCiphertext::trivial(F, k); }
};

// p-bit messages are encoded at bucket centers (2m + 1) / 2^{p+1}.
Torus32 encode_message(std::uint32_t m, int message_bits);
std::uint32_t decode_message(Torus32 phase, int message_bits);

// Booleans are +-1/8; the decision is the sign of the phase.
Torus32 encode_bool(bool bit);
bool decode_bool(Torus32 phase);

// F[i] = f(floor(i * 2^p / 2N)) for i < N: each of the 2^{p-1} messages of
// the lower half-torus gets N / 2^{p-1} slots, the upper half follows from
// negacyclicity.
TestPolynomial build_lut(const std::function<Torus32(std::uint32_t)>& f, int N, int message_bits);
TestPolynomial constant_lut(Torus32 value, int N);
TestPolynomial identity_lut(int N, int message_bits);

class LutTable {
 public:
  explicit LutTable(std::size_t capacity = 16) : capacity_(capacity) {}
  std::size_t add(TestPolynomial lut);
  const TestPolynomial& at(std::size_t index) const { return luts_.at(index); }
  std::size_t size() const { return luts_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::vector<TestPolynomial> luts_;
};

// round(2N a / 2^32) mod 2N, taken from the top log2(2N)+1 bits of a.
std::size_t rotation_amount(Torus32 a, int N);

struct PbsOptions {
  TieRule gadget_tie = TieRule::kHalfUp;
  // Round accumulator coefficients to l*beta bits between iterations.
  bool native_datapath = false;
};

// (k+1)l digit spectra, index p*l + j.
std::vector<FftDomainPoly> decompose_forward(const TglweCiphertext& c, const TransformPlans& plans,
                                             const GadgetParams& gadget, OverflowPolicy& policy,
                                             TapSink* taps = nullptr);
// k+1 accumulated columns in the inverse plan's input format.
std::vector<FftDomainPoly> mac_columns(const std::vector<FftDomainPoly>& digit_spectra, const BkEntry& entry,
                                       const TransformPlans& plans, OverflowPolicy& policy,
                                       TapSink* taps = nullptr);

TglweCiphertext external_product(const TglweCiphertext& c, const BkEntry& entry, const TransformPlans& plans,
                                 const GadgetParams& gadget, OverflowPolicy& policy, TapSink* taps = nullptr);

// ACC + (ACC * X^r - ACC) [x] BK_i with r = rotation_amount(a_i).
TglweCiphertext cmux(const TglweCiphertext& acc, const BkEntry& entry, Torus32 a_i, const TransformPlans& plans,
                     const GadgetParams& gadget, OverflowPolicy& policy, TapSink* taps = nullptr);

// Called with the external-product input of every iteration.
using CmuxObserver = std::function<void(std::size_t iteration, const TglweCiphertext& input)>;

TglweCiphertext blind_rotate(const TlweCiphertext& ct, const TestPolynomial& F, const BootstrappingKey& bk,
                             const TransformPlans& plans, OverflowPolicy& policy, const PbsOptions& options = {},
                             const CmuxObserver& observer = {}, TapSink* taps = nullptr);

struct PbsBatch {
  std::vector<TlweCiphertext> inputs;
  std::vector<std::size_t> lut_index;  // empty means LUT 0 for all
};

struct BootstrapReport {
  std::uint64_t overflow_count = 0;
  std::vector<std::uint64_t> entry_reads;  // per BK entry
  std::size_t batch_size = 0;
};

// Interleaved schedule: every ciphertext finishes iteration i before any
// starts iteration i+1, so each BK entry is fetched once per batch.
std::vector<TlweCiphertext> bootstrap(const PbsBatch& batch, const BootstrappingKey& bk, const LutTable& luts,
                                      const TransformPlans& plans, BootstrapReport* report = nullptr,
                                      const PbsOptions& options = {}, TapSink* taps = nullptr);

TlweCiphertext programmable_bootstrap(const TlweCiphertext& ct, const TestPolynomial& F, const BootstrappingKey& bk,
                                      const TransformPlans& plans, OverflowPolicy& policy,
                                      const PbsOptions& options = {});

enum class BoolGate { kNand, kAnd, kOr, kXor };
BoolGate parse_bool_gate(std::string_view name);
std::string to_string(BoolGate g);

// Linear combination of the inputs followed by a bootstrap with the constant
// 1/8 test polynomial.
TlweCiphertext gate(BoolGate op, const TlweCiphertext& c1, const TlweCiphertext& c2, const BootstrappingKey& bk,
                    const TransformPlans& plans, OverflowPolicy& policy, const PbsOptions& options = {});

// Bootstrap of (0, 1/8) - c1 - c2 with the constant 1/8 test polynomial.
TlweCiphertext gate_nand(const TlweCiphertext& c1, const TlweCiphertext& c2, const BootstrappingKey& bk,
                         const TransformPlans& plans, OverflowPolicy& policy, const PbsOptions& options = {});

}  // namespace fxtfhe

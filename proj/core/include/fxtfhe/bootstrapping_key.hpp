#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fxtfhe/ciphertext.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/negacyclic_fft.hpp"
#include "fxtfhe/params.hpp"

namespace fxtfhe {

// One TGGSW ciphertext in the FFT domain: (k+1)l rows by (k+1) columns.
struct BkEntry {
  std::size_t columns = 0;
  std::vector<FftDomainPoly> polys;  // row-major

  const FftDomainPoly& at(std::size_t row, std::size_t col) const { return polys[row * columns + col]; }
  FftDomainPoly& at(std::size_t row, std::size_t col) { return polys[row * columns + col]; }
  std::size_t rows() const { return columns == 0 ? 0 : polys.size() / columns; }
};

class BootstrappingKey {
 public:
  BootstrappingKey() = default;
  BootstrappingKey(TfheParams params, std::vector<BkEntry> entries, std::optional<FixedPointFormat> format);

  // Entry i encrypts tlwe_key[i] under the TGLWE key.
  static std::vector<TggswCiphertext> encrypt_tggsw(const SecretKeys& keys, const TfheParams& params,
                                                    std::uint64_t seed);
  static BootstrappingKey from_tggsw(const std::vector<TggswCiphertext>& tggsw, const TfheParams& params,
                                     const TransformPlans& plans, OverflowPolicy& policy);
  static BootstrappingKey generate(const SecretKeys& keys, const TfheParams& params, const TransformPlans& plans,
                                   std::uint64_t seed);
  static BkEntry convert_entry(const TggswCiphertext& g, const TransformPlans& plans, OverflowPolicy& policy);
  // Quantizes a double-precision entry at the plans' BK format.
  static BkEntry quantize_entry(const BkEntry& reference, const TransformPlans& plans, OverflowPolicy& policy);

  // Re-quantizes a reference key for fixed-point plans.
  BootstrappingKey quantized(const TransformPlans& plans, OverflowPolicy& policy) const;

  const TfheParams& params() const { return params_; }
  std::size_t size() const { return entries_.size(); }
  const BkEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::vector<BkEntry>& entries() const { return entries_; }
  bool is_fixed() const { return format_.has_value(); }
  const std::optional<FixedPointFormat>& format() const { return format_; }

  // (k+1)l * (k+1) * (N/2) * 2 * width / 8; doubles count as 64-bit words.
  double entry_bytes() const;

 private:
  TfheParams params_;
  std::vector<BkEntry> entries_;
  std::optional<FixedPointFormat> format_;
};

}  // namespace fxtfhe

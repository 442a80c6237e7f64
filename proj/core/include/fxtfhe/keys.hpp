#pragma once

#include <cstdint>
#include <vector>

#include "fxtfhe/params.hpp"

namespace fxtfhe {

struct SecretKeys {
  std::vector<std::uint8_t> tlwe_key;                 // n bits
  std::vector<std::vector<std::uint8_t>> tglwe_key;   // k polynomials of N bits
  std::vector<std::uint8_t> extracted_key;            // k*N bits

  int n() const { return static_cast<int>(tlwe_key.size()); }
  int k() const { return static_cast<int>(tglwe_key.size()); }
  int N() const { return tglwe_key.empty() ? 0 : static_cast<int>(tglwe_key[0].size()); }

  bool operator==(const SecretKeys&) const = default;
};

SecretKeys keygen(const TfheParams& params, std::uint64_t seed);

// Builds a key set from explicit bits; the extracted key is derived.
SecretKeys make_keys(std::vector<std::uint8_t> tlwe_key,
                     std::vector<std::vector<std::uint8_t>> tglwe_key);

// Extracted key position p*N + j holds coefficient j of polynomial p.
// The reversal and negation pattern lives on the ciphertext side of
// sample_extract.
std::vector<std::uint8_t> extract_key(const std::vector<std::vector<std::uint8_t>>& tglwe_key);

}  // namespace fxtfhe

#include "fxtfhe/keys.hpp"

#include <stdexcept>

#include "fxtfhe/random.hpp"

namespace fxtfhe {

std::vector<std::uint8_t> extract_key(const std::vector<std::vector<std::uint8_t>>& tglwe_key) {
  std::vector<std::uint8_t> out;
  for (const auto& poly : tglwe_key) out.insert(out.end(), poly.begin(), poly.end());
  return out;
}

SecretKeys make_keys(std::vector<std::uint8_t> tlwe_key,
                     std::vector<std::vector<std::uint8_t>> tglwe_key) {
  for (const auto& poly : tglwe_key) {
    if (poly.size() != tglwe_key.front().size()) {
      throw std::invalid_argument("key polynomials differ in length");
    }
  }
  SecretKeys keys;
  keys.tlwe_key = std::move(tlwe_key);
  keys.tglwe_key = std::move(tglwe_key);
  keys.extracted_key = extract_key(keys.tglwe_key);
  return keys;
}

SecretKeys keygen(const TfheParams& params, std::uint64_t seed) {
  params.validate();
  Prng tlwe_rng = Prng::stream(seed, "keygen.tlwe");
  Prng tglwe_rng = Prng::stream(seed, "keygen.tglwe");
  std::vector<std::uint8_t> tlwe(static_cast<std::size_t>(params.n));
  for (auto& bit : tlwe) bit = tlwe_rng.next_bit();
  std::vector<std::vector<std::uint8_t>> tglwe(static_cast<std::size_t>(params.k),
                                               std::vector<std::uint8_t>(static_cast<std::size_t>(params.N)));
  for (auto& poly : tglwe) {
    for (auto& bit : poly) bit = tglwe_rng.next_bit();
  }
  return make_keys(std::move(tlwe), std::move(tglwe));
}

}  // namespace fxtfhe

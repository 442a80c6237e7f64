#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fxtfhe/keys.hpp"
#include "fxtfhe/params.hpp"
#include "fxtfhe/random.hpp"
#include "fxtfhe/torus.hpp"

namespace fxtfhe {

using BinaryPolyKey = std::vector<std::vector<std::uint8_t>>;

struct TlweCiphertext {
  std::vector<Torus32> a;
  Torus32 b = 0;

  std::size_t dim() const { return a.size(); }
  bool operator==(const TlweCiphertext&) const = default;
};

struct TglweCiphertext {
  std::vector<TorusPolynomial> a;  // k polynomials
  TorusPolynomial b;

  std::size_t k() const { return a.size(); }
  std::size_t degree() const { return b.size(); }
  // Component p in [0, k]; component k is b.
  TorusPolynomial& component(std::size_t p) { return p < a.size() ? a[p] : b; }
  const TorusPolynomial& component(std::size_t p) const { return p < a.size() ? a[p] : b; }

  static TglweCiphertext zero(std::size_t k, std::size_t degree);
  // (a = 0, b = mu).
  static TglweCiphertext trivial(const TorusPolynomial& mu, std::size_t k);

  bool operator==(const TglweCiphertext&) const = default;
};

// Row p*l + j is an encryption of zero plus m * 2^{-(j+1)*beta} on component p.
struct TggswCiphertext {
  std::vector<TglweCiphertext> rows;
  int beta = 0;
  int l = 0;
};

// Test hooks for encryption.
struct EncryptHooks {
  bool zero_mask = false;
};

TlweCiphertext tlwe_encrypt(Torus32 mu, std::span<const std::uint8_t> key, double sigma, Prng& prng,
                            EncryptHooks hooks = {});
// Phase b - <a, s> = mu + e.
Torus32 tlwe_decrypt(const TlweCiphertext& ct, std::span<const std::uint8_t> key);
TlweCiphertext tlwe_trivial(Torus32 mu, std::size_t dim);

TlweCiphertext operator+(const TlweCiphertext& x, const TlweCiphertext& y);
TlweCiphertext operator-(const TlweCiphertext& x, const TlweCiphertext& y);
TlweCiphertext operator-(const TlweCiphertext& x);

TglweCiphertext tglwe_encrypt(const TorusPolynomial& mu, const BinaryPolyKey& key, double sigma, Prng& prng,
                              EncryptHooks hooks = {});
TorusPolynomial tglwe_decrypt(const TglweCiphertext& ct, const BinaryPolyKey& key);

TglweCiphertext operator+(const TglweCiphertext& x, const TglweCiphertext& y);
TglweCiphertext operator-(const TglweCiphertext& x, const TglweCiphertext& y);
void add_to(TglweCiphertext& acc, const TglweCiphertext& x);

// Every polynomial times X^r, r in [0, 2N).
TglweCiphertext monomial_mul(const TglweCiphertext& c, std::size_t r);

TggswCiphertext tggsw_encrypt(int m, const BinaryPolyKey& key, double sigma, int beta, int l, Prng& prng);

// TLWE of dimension k*N whose phase under the extracted key equals
// coefficient `index` of the TGLWE phase.
TlweCiphertext sample_extract(const TglweCiphertext& acc, std::size_t index = 0);

}  // namespace fxtfhe

#include "fxtfhe/ciphertext.hpp"

#include <stdexcept>

namespace fxtfhe {

namespace {

void check_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(what);
}

}  // namespace

TglweCiphertext TglweCiphertext::zero(std::size_t k, std::size_t degree) {
  TglweCiphertext c;
  c.a.assign(k, TorusPolynomial(degree));
  c.b = TorusPolynomial(degree);
  return c;
}

TglweCiphertext TglweCiphertext::trivial(const TorusPolynomial& mu, std::size_t k) {
  TglweCiphertext c = zero(k, mu.size());
  c.b = mu;
  return c;
}

TlweCiphertext tlwe_encrypt(Torus32 mu, std::span<const std::uint8_t> key, double sigma, Prng& prng,
                            EncryptHooks hooks) {
  TlweCiphertext ct;
  ct.a.resize(key.size());
  Torus32 dot = 0;
  for (std::size_t i = 0; i < key.size(); ++i) {
    ct.a[i] = hooks.zero_mask ? 0 : prng.next_u32();
    if (key[i]) dot += ct.a[i];
  }
  ct.b = dot + gaussian_torus(prng, sigma) + mu;
  return ct;
}

Torus32 tlwe_decrypt(const TlweCiphertext& ct, std::span<const std::uint8_t> key) {
  check_dim(ct.dim(), key.size(), "TLWE dimension does not match key");
  Torus32 dot = 0;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i]) dot += ct.a[i];
  }
  return ct.b - dot;
}

TlweCiphertext tlwe_trivial(Torus32 mu, std::size_t dim) {
  TlweCiphertext ct;
  ct.a.assign(dim, 0);
  ct.b = mu;
  return ct;
}

TlweCiphertext operator+(const TlweCiphertext& x, const TlweCiphertext& y) {
  check_dim(x.dim(), y.dim(), "TLWE dimension mismatch");
  TlweCiphertext r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  r.b += y.b;
  return r;
}

TlweCiphertext operator-(const TlweCiphertext& x, const TlweCiphertext& y) {
  check_dim(x.dim(), y.dim(), "TLWE dimension mismatch");
  TlweCiphertext r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
  r.b -= y.b;
  return r;
}

TlweCiphertext operator-(const TlweCiphertext& x) {
  TlweCiphertext r = x;
  for (auto& v : r.a) v = -v;
  r.b = -r.b;
  return r;
}

TglweCiphertext tglwe_encrypt(const TorusPolynomial& mu, const BinaryPolyKey& key, double sigma, Prng& prng,
                              EncryptHooks hooks) {
  const std::size_t degree = mu.size();
  TglweCiphertext ct = TglweCiphertext::zero(key.size(), degree);
  for (std::size_t p = 0; p < key.size(); ++p) {
    check_dim(key[p].size(), degree, "TGLWE key degree mismatch");
    if (!hooks.zero_mask) {
      ct.a[p] = uniform_torus_polynomial(prng, degree);
      add_to(ct.b, mul_binary(ct.a[p], key[p]));
    }
  }
  for (std::size_t i = 0; i < degree; ++i) ct.b[i] += gaussian_torus(prng, sigma) + mu[i];
  return ct;
}

TorusPolynomial tglwe_decrypt(const TglweCiphertext& ct, const BinaryPolyKey& key) {
  check_dim(ct.k(), key.size(), "TGLWE dimension does not match key");
  TorusPolynomial phase = ct.b;
  for (std::size_t p = 0; p < key.size(); ++p) sub_from(phase, mul_binary(ct.a[p], key[p]));
  return phase;
}

TglweCiphertext operator+(const TglweCiphertext& x, const TglweCiphertext& y) {
  TglweCiphertext r = x;
  add_to(r, y);
  return r;
}

TglweCiphertext operator-(const TglweCiphertext& x, const TglweCiphertext& y) {
  check_dim(x.k(), y.k(), "TGLWE dimension mismatch");
  TglweCiphertext r = x;
  for (std::size_t p = 0; p < r.a.size(); ++p) sub_from(r.a[p], y.a[p]);
  sub_from(r.b, y.b);
  return r;
}

void add_to(TglweCiphertext& acc, const TglweCiphertext& x) {
  check_dim(acc.k(), x.k(), "TGLWE dimension mismatch");
  for (std::size_t p = 0; p < acc.a.size(); ++p) add_to(acc.a[p], x.a[p]);
  add_to(acc.b, x.b);
}

TglweCiphertext monomial_mul(const TglweCiphertext& c, std::size_t r) {
  TglweCiphertext out;
  out.a.reserve(c.a.size());
  for (const auto& p : c.a) out.a.push_back(mul_by_monomial(p, r));
  out.b = mul_by_monomial(c.b, r);
  return out;
}

TggswCiphertext tggsw_encrypt(int m, const BinaryPolyKey& key, double sigma, int beta, int l, Prng& prng) {
  if (key.empty()) throw std::invalid_argument("empty TGLWE key");
  if (beta < 1 || l < 1 || beta * l > 32) throw std::invalid_argument("invalid gadget parameters");
  const std::size_t k = key.size();
  const std::size_t degree = key[0].size();
  TggswCiphertext g;
  g.beta = beta;
  g.l = l;
  const TorusPolynomial zero(degree);
  for (std::size_t p = 0; p <= k; ++p) {
    for (int j = 0; j < l; ++j) {
      TglweCiphertext row = tglwe_encrypt(zero, key, sigma, prng);
      const auto gadget = static_cast<Torus32>(1ULL << (32 - (j + 1) * beta));
      row.component(p)[0] += static_cast<Torus32>(m) * gadget;
      g.rows.push_back(std::move(row));
    }
  }
  return g;
}

TlweCiphertext sample_extract(const TglweCiphertext& acc, std::size_t index) {
  const std::size_t n = acc.degree();
  if (index >= n) throw std::invalid_argument("sample_extract index out of range");
  TlweCiphertext out;
  out.a.resize(acc.k() * n);
  for (std::size_t p = 0; p < acc.k(); ++p) {
    const TorusPolynomial& a = acc.a[p];
    for (std::size_t j = 0; j < n; ++j) {
      // Coefficient index of (a * s) collects a[index - j] * s[j], negated on wrap.
      out.a[p * n + j] = j <= index ? a[index - j] : -a[n + index - j];
    }
  }
  out.b = acc.b[index];
  return out;
}

}  // namespace fxtfhe

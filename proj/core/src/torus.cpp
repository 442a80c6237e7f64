#include "fxtfhe/torus.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fxtfhe {

double torus_to_double(Torus32 t) {
  return static_cast<double>(static_cast<std::int32_t>(t)) * 0x1.0p-32;
}

Torus32 double_to_torus(double x) {
  double frac = x - std::floor(x);
  auto scaled = static_cast<std::int64_t>(std::floor(frac * 0x1.0p32 + 0.5));
  return static_cast<Torus32>(static_cast<std::uint64_t>(scaled));
}

Torus32 gaussian_torus(Prng& prng, double sigma) {
  double g = prng.gaussian();
  auto v = static_cast<std::int64_t>(std::llround(g * sigma * 0x1.0p32));
  return static_cast<Torus32>(static_cast<std::uint64_t>(v));
}

std::uint32_t torus_abs(Torus32 t) {
  auto s = static_cast<std::int32_t>(t);
  return s < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(s)) : static_cast<std::uint32_t>(s);
}

namespace {

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("polynomial degree mismatch");
}

}  // namespace

void add_to(TorusPolynomial& acc, const TorusPolynomial& p) {
  check_same_size(acc.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
}

void sub_from(TorusPolynomial& acc, const TorusPolynomial& p) {
  check_same_size(acc.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] -= p[i];
}

TorusPolynomial operator+(const TorusPolynomial& a, const TorusPolynomial& b) {
  TorusPolynomial r = a;
  add_to(r, b);
  return r;
}

TorusPolynomial operator-(const TorusPolynomial& a, const TorusPolynomial& b) {
  TorusPolynomial r = a;
  sub_from(r, b);
  return r;
}

TorusPolynomial negate(const TorusPolynomial& p) {
  TorusPolynomial r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = -p[i];
  return r;
}

TorusPolynomial mul_by_monomial(const TorusPolynomial& p, std::size_t r) {
  const std::size_t n = p.size();
  if (r >= 2 * n) throw std::invalid_argument("monomial exponent out of range");
  TorusPolynomial out(n);
  const bool flip = r >= n;
  const std::size_t s = flip ? r - n : r;
  for (std::size_t i = 0; i < n; ++i) {
    // Coefficient i moves to i + s; wrapping past N negates.
    std::size_t j = i + s;
    Torus32 v = p[i];
    bool neg = flip;
    if (j >= n) {
      j -= n;
      neg = !neg;
    }
    out[j] = neg ? -v : v;
  }
  return out;
}

TorusPolynomial mul_schoolbook(const TorusPolynomial& p, const IntPolynomial& q) {
  const std::size_t n = p.size();
  check_same_size(n, q.size());
  TorusPolynomial out(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto qj = static_cast<std::uint32_t>(q[j]);
    if (qj == 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      Torus32 term = p[i] * qj;
      std::size_t d = i + j;
      if (d < n) {
        out[d] += term;
      } else {
        out[d - n] -= term;
      }
    }
  }
  return out;
}

TorusPolynomial mul_binary(const TorusPolynomial& p, std::span<const std::uint8_t> key) {
  const std::size_t n = p.size();
  check_same_size(n, key.size());
  TorusPolynomial out(n);
  Torus32* o = out.data();
  const Torus32* src = p.data();
  for (std::size_t j = 0; j < n; ++j) {
    if (!key[j]) continue;
    // Add p * X^j.
    for (std::size_t i = 0; i + j < n; ++i) o[i + j] += src[i];
    for (std::size_t i = n - j; i < n; ++i) o[i + j - n] -= src[i];
  }
  return out;
}

TorusPolynomial uniform_torus_polynomial(Prng& prng, std::size_t degree) {
  TorusPolynomial p(degree);
  for (auto& c : p) c = prng.next_u32();
  return p;
}

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

int log2_exact(std::size_t x) {
  if (!is_power_of_two(x)) throw std::invalid_argument("not a power of two");
  return std::countr_zero(x);
}

}  // namespace fxtfhe

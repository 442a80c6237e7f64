#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fxtfhe/random.hpp"

namespace fxtfhe {

// Torus element: value / 2^32 in [0, 1). Arithmetic wraps modulo 2^32.
using Torus32 = std::uint32_t;

// Signed representative in [-1/2, 1/2).
double torus_to_double(Torus32 t);
// Nearest grid point to x mod 1 (ties round up).
Torus32 double_to_torus(double x);
// Gaussian noise of stddev sigma (torus units), rounded to the grid.
Torus32 gaussian_torus(Prng& prng, double sigma);
// Signed distance |t| on the torus in units of 2^-32.
std::uint32_t torus_abs(Torus32 t);

template <typename T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t degree) : coeffs_(degree, T{}) {}
  explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) {}

  std::size_t size() const { return coeffs_.size(); }
  T& operator[](std::size_t i) { return coeffs_[i]; }
  const T& operator[](std::size_t i) const { return coeffs_[i]; }
  T* data() { return coeffs_.data(); }
  const T* data() const { return coeffs_.data(); }
  std::span<T> span() { return coeffs_; }
  std::span<const T> span() const { return coeffs_; }
  const std::vector<T>& coeffs() const { return coeffs_; }
  auto begin() { return coeffs_.begin(); }
  auto end() { return coeffs_.end(); }
  auto begin() const { return coeffs_.begin(); }
  auto end() const { return coeffs_.end(); }

  bool operator==(const Polynomial&) const = default;

 private:
  std::vector<T> coeffs_;
};

// Element of T_N[X] = T[X]/(X^N + 1).
using TorusPolynomial = Polynomial<Torus32>;
// Small-integer polynomial (decomposition digits, keys).
using IntPolynomial = Polynomial<std::int32_t>;

void add_to(TorusPolynomial& acc, const TorusPolynomial& p);
void sub_from(TorusPolynomial& acc, const TorusPolynomial& p);
TorusPolynomial operator+(const TorusPolynomial& a, const TorusPolynomial& b);
TorusPolynomial operator-(const TorusPolynomial& a, const TorusPolynomial& b);
TorusPolynomial negate(const TorusPolynomial& p);

// p * X^r for r in [0, 2N).
TorusPolynomial mul_by_monomial(const TorusPolynomial& p, std::size_t r);

// Exact schoolbook products modulo X^N + 1 and 2^32.
TorusPolynomial mul_schoolbook(const TorusPolynomial& p, const IntPolynomial& q);
TorusPolynomial mul_binary(const TorusPolynomial& p, std::span<const std::uint8_t> key);

TorusPolynomial uniform_torus_polynomial(Prng& prng, std::size_t degree);

bool is_power_of_two(std::size_t x);
int log2_exact(std::size_t x);

}  // namespace fxtfhe

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace fxtfhe {

using int128 = __int128;

// Two's-complement format. The sign bit is counted in integer_bits.
struct FixedPointFormat {
  int width = 0;
  int integer_bits = 0;
  int fractional_bits = 0;

  static FixedPointFormat make(int integer_bits, int fractional_bits);
  // "w:i:f", e.g. "29:15:14".
  static FixedPointFormat parse(std::string_view text);

  void validate() const;
  std::string to_string() const;
  // "FixedPoint_26(7,19)".
  std::string label() const;

  std::int64_t max_raw() const { return static_cast<std::int64_t>((static_cast<int128>(1) << (width - 1)) - 1); }
  std::int64_t min_raw() const { return static_cast<std::int64_t>(-(static_cast<int128>(1) << (width - 1))); }
  double lsb() const;
  double max_value() const;

  // Same width, binary point moved: value = raw * 2^{-(fractional_bits - shift)}.
  FixedPointFormat reinterpreted(int shift) const { return {width, integer_bits + shift, fractional_bits - shift}; }
  FixedPointFormat widened(int extra_integer_bits) const {
    return {width + extra_integer_bits, integer_bits + extra_integer_bits, fractional_bits};
  }

  bool operator==(const FixedPointFormat&) const = default;
};

enum class RoundingMode { kTruncate, kHalfUp, kNearestEven };

// Rounding used inside the FFT, MAC and IFFT datapath unless configured.
inline constexpr RoundingMode kDefaultDatapathRounding = RoundingMode::kNearestEven;
enum class OverflowMode { kWrap, kSaturate, kTrap };

RoundingMode parse_rounding_mode(std::string_view text);
std::string to_string(RoundingMode mode);
OverflowMode parse_overflow_mode(std::string_view text);
std::string to_string(OverflowMode mode);

class FixedPointOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counts every range violation; the mode decides what value is produced.
class OverflowPolicy {
 public:
  OverflowPolicy() = default;
  explicit OverflowPolicy(OverflowMode mode) : mode_(mode) {}

  OverflowMode mode() const { return mode_; }
  std::uint64_t count() const { return count_; }
  void record() { ++count_; }
  void merge(const OverflowPolicy& other) { count_ += other.count_; }
  void reset() { count_ = 0; }

 private:
  OverflowMode mode_ = OverflowMode::kWrap;
  std::uint64_t count_ = 0;
};

struct FixedPointValue {
  std::int64_t raw = 0;
  FixedPointFormat format;

  double to_double() const;
  bool operator==(const FixedPointValue&) const = default;
};

struct ComplexFixed {
  FixedPointValue re;
  FixedPointValue im;

  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  bool operator==(const ComplexFixed&) const = default;
};

// Twiddle in the form used by the 3-multiply product: C - D and C + D are
// held exactly with one guard integer bit.
struct GaussTwiddle {
  std::int64_t c_minus_d = 0;
  std::int64_t c_plus_d = 0;
  std::int64_t c = 0;
  FixedPointFormat format;  // format of C and D

  static GaussTwiddle from(std::int64_t c_raw, std::int64_t d_raw, const FixedPointFormat& fmt) {
    return {c_raw - d_raw, c_raw + d_raw, c_raw, fmt};
  }
  static GaussTwiddle quantized(std::complex<double> w, const FixedPointFormat& fmt, RoundingMode rounding,
                                OverflowPolicy& policy);
  std::int64_t d() const { return c_plus_d - c; }
};

FixedPointValue quantize(double x, const FixedPointFormat& fmt, RoundingMode rounding, OverflowPolicy& policy);
FixedPointValue convert(const FixedPointValue& v, const FixedPointFormat& fmt, RoundingMode rounding,
                        OverflowPolicy& policy);
FixedPointValue fp_add(const FixedPointValue& a, const FixedPointValue& b, OverflowPolicy& policy);
FixedPointValue fp_sub(const FixedPointValue& a, const FixedPointValue& b, OverflowPolicy& policy);
FixedPointValue fp_mul(const FixedPointValue& a, const FixedPointValue& b, const FixedPointFormat& out,
                       RoundingMode rounding, OverflowPolicy& policy);

// X = (C-D)B + Z, Y = (C+D)A - Z with Z = C(A-B), for x = A + jB, w = C + jD.
ComplexFixed gauss_cmul(const ComplexFixed& x, const GaussTwiddle& w, const FixedPointFormat& out,
                        RoundingMode rounding, OverflowPolicy& policy);
// Four-multiply reference product.
ComplexFixed schoolbook_cmul(const ComplexFixed& x, const ComplexFixed& w, const FixedPointFormat& out,
                             RoundingMode rounding, OverflowPolicy& policy);

// Number of fixed-point multiplications issued on this thread.
std::uint64_t fp_mul_count();

namespace fx {

inline thread_local std::uint64_t mul_counter = 0;
inline void count_mul() { ++mul_counter; }

// Shift right by s bits (left if s < 0) with the given rounding.
inline int128 round_shift(int128 v, int s, RoundingMode rounding) {
  if (s <= 0) return v << (-s);
  if (s >= 127) return v < 0 ? (rounding == RoundingMode::kTruncate ? -1 : 0) : 0;
  switch (rounding) {
    case RoundingMode::kTruncate:
      return v >> s;
    case RoundingMode::kHalfUp:
      return (v + (static_cast<int128>(1) << (s - 1))) >> s;
    case RoundingMode::kNearestEven: {
      int128 q = v >> s;
      int128 r = v - (q << s);
      int128 half = static_cast<int128>(1) << (s - 1);
      if (r > half || (r == half && (q & 1) != 0)) ++q;
      return q;
    }
  }
  return v >> s;
}

std::int64_t overflow(int128 v, const FixedPointFormat& fmt, OverflowPolicy& policy);

inline std::int64_t round_shift64(std::int64_t v, int s, RoundingMode rounding) {
  if (s <= 0 || s >= 63) return static_cast<std::int64_t>(round_shift(v, s, rounding));
  switch (rounding) {
    case RoundingMode::kTruncate:
      return v >> s;
    case RoundingMode::kHalfUp:
      return (v >> s) + ((v >> (s - 1)) & 1);
    case RoundingMode::kNearestEven: {
      std::int64_t q = v >> s;
      const std::uint64_t mask = (std::uint64_t{1} << s) - 1;
      const std::uint64_t r = static_cast<std::uint64_t>(v) & mask;
      const std::uint64_t half = std::uint64_t{1} << (s - 1);
      if (r > half || (r == half && (q & 1) != 0)) ++q;
      return q;
    }
  }
  return v >> s;
}

// Range check into fmt.
inline std::int64_t fit(int128 v, const FixedPointFormat& fmt, OverflowPolicy& policy) {
  if (v < fmt.min_raw() || v > fmt.max_raw()) return overflow(v, fmt, policy);
  return static_cast<std::int64_t>(v);
}

// raw_a * 2^-fa times raw_b * 2^-fb, rounded into out.
inline std::int64_t mul(int128 a, int fa, int128 b, int fb, const FixedPointFormat& out, RoundingMode rounding,
                        OverflowPolicy& policy) {
  count_mul();
  const int s = fa + fb - out.fractional_bits;
  std::int64_t p64;
  if (a >= INT64_MIN && a <= INT64_MAX && b >= INT64_MIN && b <= INT64_MAX &&
      !__builtin_mul_overflow(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b), &p64)) {
    if (s > 0) return fit(round_shift64(p64, s, rounding), out, policy);
  }
  return fit(round_shift(a * b, s, rounding), out, policy);
}

// Raw-level 3-multiply complex product; x has fractional bits fx.
inline void gauss_cmul(std::int64_t a, std::int64_t b, int fx, const GaussTwiddle& w, const FixedPointFormat& out,
                       RoundingMode rounding, OverflowPolicy& policy, std::int64_t& re, std::int64_t& im) {
  const int fw = w.format.fractional_bits;
  const int128 a_minus_b = static_cast<int128>(a) - b;
  const std::int64_t z = mul(w.c, fw, a_minus_b, fx, out, rounding, policy);
  const std::int64_t p = mul(w.c_minus_d, fw, b, fx, out, rounding, policy);
  const std::int64_t q = mul(w.c_plus_d, fw, a, fx, out, rounding, policy);
  re = fit(static_cast<int128>(p) + z, out, policy);
  im = fit(static_cast<int128>(q) - z, out, policy);
}

// Fast paths for operands narrow enough that every product fits in int64.

// True when a twiddle of width tw times a difference of two width-w values fits in int64.
inline bool narrow_product(int w, int tw) { return w + tw <= 61; }

template <RoundingMode RM>
inline std::int64_t shift_right(std::int64_t v, int s) {
  if constexpr (RM == RoundingMode::kTruncate) {
    return v >> s;
  } else if constexpr (RM == RoundingMode::kHalfUp) {
    return (v >> s) + ((v >> (s - 1)) & 1);
  } else {
    std::int64_t q = v >> s;
    const std::uint64_t r = static_cast<std::uint64_t>(v) & ((std::uint64_t{1} << s) - 1);
    const std::uint64_t half = std::uint64_t{1} << (s - 1);
    q += (r > half) | ((r == half) & static_cast<std::uint64_t>(q & 1));
    return q;
  }
}

inline std::int64_t fit64(std::int64_t v, std::int64_t lo, std::int64_t hi, const FixedPointFormat& fmt,
                          OverflowPolicy& policy) {
  if (v < lo || v > hi) [[unlikely]]
    return overflow(v, fmt, policy);
  return v;
}

// gauss_cmul for narrow operands; s = twiddle fraction + input fraction - output fraction, s >= 1.
template <RoundingMode RM>
inline void gauss_cmul_narrow(std::int64_t a, std::int64_t b, int s, const GaussTwiddle& w, const FixedPointFormat& out,
                              std::int64_t lo, std::int64_t hi, OverflowPolicy& policy, std::int64_t& re,
                              std::int64_t& im) {
  mul_counter += 3;
  const std::int64_t z = fit64(shift_right<RM>(w.c * (a - b), s), lo, hi, out, policy);
  const std::int64_t p = fit64(shift_right<RM>(w.c_minus_d * b, s), lo, hi, out, policy);
  const std::int64_t q = fit64(shift_right<RM>(w.c_plus_d * a, s), lo, hi, out, policy);
  re = fit64(p + z, lo, hi, out, policy);
  im = fit64(q - z, lo, hi, out, policy);
}

template <class F>
decltype(auto) with_rounding(RoundingMode rm, F&& f) {
  switch (rm) {
    case RoundingMode::kTruncate:
      return f(std::integral_constant<RoundingMode, RoundingMode::kTruncate>{});
    case RoundingMode::kHalfUp:
      return f(std::integral_constant<RoundingMode, RoundingMode::kHalfUp>{});
    case RoundingMode::kNearestEven:
      break;
  }
  return f(std::integral_constant<RoundingMode, RoundingMode::kNearestEven>{});
}

}  // namespace fx

}  // namespace fxtfhe

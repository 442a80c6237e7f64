#include "fxtfhe/fixed_point.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace fxtfhe {

namespace {

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("invalid integer in format: " + std::string(text));
  }
  return value;
}

}  // namespace

namespace fx {

std::int64_t overflow(int128 v, const FixedPointFormat& fmt, OverflowPolicy& policy) {
  policy.record();
  switch (policy.mode()) {
    case OverflowMode::kSaturate:
      return v < 0 ? fmt.min_raw() : fmt.max_raw();
    case OverflowMode::kTrap:
      throw FixedPointOverflow("fixed-point overflow in format " + fmt.to_string());
    case OverflowMode::kWrap:
      break;
  }
  // Keep the low `width` bits and sign-extend.
  const int shift = 128 - fmt.width;
  auto u = static_cast<unsigned __int128>(v) << shift;
  return static_cast<std::int64_t>(static_cast<int128>(u) >> shift);
}

}  // namespace fx

std::uint64_t fp_mul_count() { return fx::mul_counter; }

FixedPointFormat FixedPointFormat::make(int integer_bits, int fractional_bits) {
  FixedPointFormat f{integer_bits + fractional_bits, integer_bits, fractional_bits};
  f.validate();
  return f;
}

FixedPointFormat FixedPointFormat::parse(std::string_view text) {
  auto c1 = text.find(':');
  auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw std::invalid_argument("format must be w:i:f, got " + std::string(text));
  FixedPointFormat f{parse_int(text.substr(0, c1)), parse_int(text.substr(c1 + 1, c2 - c1 - 1)),
                     parse_int(text.substr(c2 + 1))};
  f.validate();
  return f;
}

void FixedPointFormat::validate() const {
  if (width < 2 || width > 64) throw std::invalid_argument("format width must be in [2, 64]: " + to_string());
  if (integer_bits + fractional_bits != width) {
    throw std::invalid_argument("format width must equal integer + fractional bits: " + to_string());
  }
}

std::string FixedPointFormat::to_string() const {
  return std::to_string(width) + ":" + std::to_string(integer_bits) + ":" + std::to_string(fractional_bits);
}

std::string FixedPointFormat::label() const {
  return "FixedPoint_" + std::to_string(width) + "(" + std::to_string(integer_bits) + "," +
         std::to_string(fractional_bits) + ")";
}

double FixedPointFormat::lsb() const { return std::ldexp(1.0, -fractional_bits); }

double FixedPointFormat::max_value() const { return std::ldexp(static_cast<double>(max_raw()), -fractional_bits); }

RoundingMode parse_rounding_mode(std::string_view text) {
  if (text == "truncate") return RoundingMode::kTruncate;
  if (text == "half-up") return RoundingMode::kHalfUp;
  if (text == "nearest-even") return RoundingMode::kNearestEven;
  throw std::invalid_argument("unknown rounding mode: " + std::string(text));
}

std::string to_string(RoundingMode mode) {
  switch (mode) {
    case RoundingMode::kTruncate:
      return "truncate";
    case RoundingMode::kHalfUp:
      return "half-up";
    case RoundingMode::kNearestEven:
      return "nearest-even";
  }
  return "?";
}

OverflowMode parse_overflow_mode(std::string_view text) {
  if (text == "wrap") return OverflowMode::kWrap;
  if (text == "saturate") return OverflowMode::kSaturate;
  if (text == "trap") return OverflowMode::kTrap;
  throw std::invalid_argument("unknown overflow mode: " + std::string(text));
}

std::string to_string(OverflowMode mode) {
  switch (mode) {
    case OverflowMode::kWrap:
      return "wrap";
    case OverflowMode::kSaturate:
      return "saturate";
    case OverflowMode::kTrap:
      return "trap";
  }
  return "?";
}

double FixedPointValue::to_double() const { return std::ldexp(static_cast<double>(raw), -format.fractional_bits); }

FixedPointValue quantize(double x, const FixedPointFormat& fmt, RoundingMode rounding, OverflowPolicy& policy) {
  if (!std::isfinite(x)) throw std::invalid_argument("cannot quantize a non-finite value");
  double y = std::ldexp(x, fmt.fractional_bits);
  double r = y;
  if (std::fabs(y) < 0x1.0p52) {
    switch (rounding) {
      case RoundingMode::kTruncate:
        r = std::floor(y);
        break;
      case RoundingMode::kHalfUp:
        r = std::floor(y + 0.5);
        break;
      case RoundingMode::kNearestEven:
        r = std::nearbyint(y);
        break;
    }
  }
  if (std::fabs(r) >= 0x1.0p126) {
    // Far outside any format; reduce so the wrapped value is still well defined.
    r = std::fmod(r, std::ldexp(1.0, fmt.width));
  }
  return {fx::fit(static_cast<int128>(r), fmt, policy), fmt};
}

FixedPointValue convert(const FixedPointValue& v, const FixedPointFormat& fmt, RoundingMode rounding,
                        OverflowPolicy& policy) {
  int128 r = fx::round_shift(v.raw, v.format.fractional_bits - fmt.fractional_bits, rounding);
  return {fx::fit(r, fmt, policy), fmt};
}

namespace {

void require_same_format(const FixedPointValue& a, const FixedPointValue& b) {
  if (!(a.format == b.format)) throw std::invalid_argument("fixed-point operands have different formats");
}

void require_exact_product(int wa, int wb) {
  if (wa + wb > 127) throw std::invalid_argument("operand widths too large for an exact product");
}

}  // namespace

FixedPointValue fp_add(const FixedPointValue& a, const FixedPointValue& b, OverflowPolicy& policy) {
  require_same_format(a, b);
  return {fx::fit(static_cast<int128>(a.raw) + b.raw, a.format, policy), a.format};
}

FixedPointValue fp_sub(const FixedPointValue& a, const FixedPointValue& b, OverflowPolicy& policy) {
  require_same_format(a, b);
  return {fx::fit(static_cast<int128>(a.raw) - b.raw, a.format, policy), a.format};
}

FixedPointValue fp_mul(const FixedPointValue& a, const FixedPointValue& b, const FixedPointFormat& out,
                       RoundingMode rounding, OverflowPolicy& policy) {
  require_exact_product(a.format.width, b.format.width);
  return {fx::mul(a.raw, a.format.fractional_bits, b.raw, b.format.fractional_bits, out, rounding, policy), out};
}

GaussTwiddle GaussTwiddle::quantized(std::complex<double> w, const FixedPointFormat& fmt, RoundingMode rounding,
                                     OverflowPolicy& policy) {
  auto c = quantize(w.real(), fmt, rounding, policy);
  auto d = quantize(w.imag(), fmt, rounding, policy);
  return from(c.raw, d.raw, fmt);
}

ComplexFixed gauss_cmul(const ComplexFixed& x, const GaussTwiddle& w, const FixedPointFormat& out,
                        RoundingMode rounding, OverflowPolicy& policy) {
  require_same_format(x.re, x.im);
  require_exact_product(x.re.format.width + 1, w.format.width + 1);
  ComplexFixed r{{0, out}, {0, out}};
  fx::gauss_cmul(x.re.raw, x.im.raw, x.re.format.fractional_bits, w, out, rounding, policy, r.re.raw, r.im.raw);
  return r;
}

ComplexFixed schoolbook_cmul(const ComplexFixed& x, const ComplexFixed& w, const FixedPointFormat& out,
                             RoundingMode rounding, OverflowPolicy& policy) {
  auto ac = fp_mul(x.re, w.re, out, rounding, policy);
  auto bd = fp_mul(x.im, w.im, out, rounding, policy);
  auto ad = fp_mul(x.re, w.im, out, rounding, policy);
  auto bc = fp_mul(x.im, w.re, out, rounding, policy);
  return {fp_sub(ac, bd, policy), fp_add(ad, bc, policy)};
}

}  // namespace fxtfhe

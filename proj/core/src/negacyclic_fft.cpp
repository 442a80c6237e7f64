#include "fxtfhe/negacyclic_fft.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fxtfhe {

// ---- ScalingSchedule ------------------------------------------------------

ScalingSchedule ScalingSchedule::none(int stages) { return ScalingSchedule(std::vector<bool>(stages, false)); }

ScalingSchedule ScalingSchedule::all(int stages) { return ScalingSchedule(std::vector<bool>(stages, true)); }

ScalingSchedule ScalingSchedule::msb_tracking(int stages) {
  std::vector<bool> s(static_cast<std::size_t>(stages), false);
  for (int i = 1; i < stages; i += 2) s[static_cast<std::size_t>(i)] = true;
  return ScalingSchedule(std::move(s));
}

ScalingSchedule ScalingSchedule::parse(std::string_view text, int stages) {
  if (text == "none") return none(stages);
  if (text == "all") return all(stages);
  if (text == "msb-tracking") return msb_tracking(stages);
  if (text.size() != static_cast<std::size_t>(stages)) {
    throw std::invalid_argument("schedule must have one flag per stage: " + std::string(text));
  }
  std::vector<bool> s;
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("schedule flags must be 0 or 1");
    s.push_back(c == '1');
  }
  return ScalingSchedule(std::move(s));
}

int ScalingSchedule::scaled_count() const {
  int c = 0;
  for (bool b : stages_) c += b ? 1 : 0;
  return c;
}

std::string ScalingSchedule::to_string() const {
  std::string s;
  for (bool b : stages_) s.push_back(b ? '1' : '0');
  return s;
}

// ---- FftDomainPoly --------------------------------------------------------

FftDomainPoly FftDomainPoly::reference(std::vector<cplx> values, int scale_exponent) {
  FftDomainPoly f;
  f.arithmetic_ = FftArithmetic::kReference;
  f.values_ = std::move(values);
  f.scale_exponent_ = scale_exponent;
  return f;
}

FftDomainPoly FftDomainPoly::fixed(std::vector<std::int64_t> re, std::vector<std::int64_t> im,
                                   const FixedPointFormat& fmt, int scale_exponent) {
  if (re.size() != im.size()) throw std::invalid_argument("real and imaginary parts differ in length");
  FftDomainPoly f;
  f.arithmetic_ = FftArithmetic::kFixed;
  f.re_ = std::move(re);
  f.im_ = std::move(im);
  f.format_ = fmt;
  f.scale_exponent_ = scale_exponent;
  return f;
}

FftDomainPoly FftDomainPoly::zero_reference(std::size_t size) { return reference(std::vector<cplx>(size)); }

FftDomainPoly FftDomainPoly::zero_fixed(std::size_t size, const FixedPointFormat& fmt) {
  return fixed(std::vector<std::int64_t>(size), std::vector<std::int64_t>(size), fmt);
}

double FftDomainPoly::scale() const { return std::ldexp(1.0, -scale_exponent_); }

cplx FftDomainPoly::stored(std::size_t i) const {
  if (!is_fixed()) return values_[i];
  return {std::ldexp(static_cast<double>(re_[i]), -format_.fractional_bits),
          std::ldexp(static_cast<double>(im_[i]), -format_.fractional_bits)};
}

cplx FftDomainPoly::logical(std::size_t i) const {
  cplx s = stored(i);
  return {std::ldexp(s.real(), scale_exponent_), std::ldexp(s.imag(), scale_exponent_)};
}

FftDomainPoly FftDomainPoly::at_logical_scale() const {
  if (is_fixed()) return fixed(re_, im_, format_.reinterpreted(scale_exponent_), 0);
  std::vector<cplx> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = logical(i);
  return reference(std::move(v), 0);
}

// ---- helpers --------------------------------------------------------------

namespace {

std::vector<cplx> roots(int count, long double angle_step) {
  std::vector<cplx> out(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    long double a = angle_step * static_cast<long double>(t);
    out[static_cast<std::size_t>(t)] = cplx(static_cast<double>(std::cos(a)), static_cast<double>(std::sin(a)));
  }
  return out;
}

void record_complex(TapSink* taps, std::string_view name, std::span<const cplx> v) {
  if (!taps) return;
  std::vector<double> flat;
  flat.reserve(2 * v.size());
  for (const auto& c : v) {
    flat.push_back(c.real());
    flat.push_back(c.imag());
  }
  taps->record(name, flat);
}

void record_fixed(TapSink* taps, std::string_view name, const std::vector<std::int64_t>& re,
                  const std::vector<std::int64_t>& im, const FixedPointFormat& fmt) {
  if (!taps) return;
  std::vector<double> flat;
  flat.reserve(2 * re.size());
  for (std::size_t i = 0; i < re.size(); ++i) {
    flat.push_back(std::ldexp(static_cast<double>(re[i]), -fmt.fractional_bits));
    flat.push_back(std::ldexp(static_cast<double>(im[i]), -fmt.fractional_bits));
  }
  taps->record(name, flat);
}

std::string stage_tap(const char* prefix, int stage) { return std::string(prefix) + ".stage" + std::to_string(stage); }

const char* prefix_of(FftDirection d) { return d == FftDirection::kForward ? "fft" : "ifft"; }

}  // namespace

std::vector<cplx> fold(std::span<const double> p) {
  if (p.size() < 2 || p.size() % 2 != 0) throw std::invalid_argument("fold needs an even length");
  const std::size_t m = p.size() / 2;
  std::vector<cplx> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = cplx(p[i], p[i + m]);
  return out;
}

std::vector<double> unfold(std::span<const cplx> v) {
  const std::size_t m = v.size();
  std::vector<double> out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = v[i].real();
    out[i + m] = v[i].imag();
  }
  return out;
}

std::vector<cplx> twist(std::span<const cplx> v, int N) {
  if (v.size() * 2 != static_cast<std::size_t>(N)) throw std::invalid_argument("twist length must be N/2");
  auto psi = roots(static_cast<int>(v.size()), std::numbers::pi_v<long double> / N);
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * psi[i];
  return out;
}

std::vector<cplx> untwist(std::span<const cplx> v, int N) {
  if (v.size() * 2 != static_cast<std::size_t>(N)) throw std::invalid_argument("untwist length must be N/2");
  auto psi = roots(static_cast<int>(v.size()), -std::numbers::pi_v<long double> / N);
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * psi[i];
  return out;
}

std::vector<double> torus_to_reals(const TorusPolynomial& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = torus_to_double(p[i]);
  return out;
}

std::vector<double> int_to_reals(const IntPolynomial& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i];
  return out;
}

// ---- FftPlan --------------------------------------------------------------

FftPlan FftPlan::reference(int N, FftDirection direction, std::optional<ScalingSchedule> schedule) {
  if (N < 2 || !is_power_of_two(static_cast<std::size_t>(N))) throw std::invalid_argument("N must be a power of two");
  FftPlan plan;
  plan.ring_degree_ = N;
  plan.direction_ = direction;
  plan.arithmetic_ = FftArithmetic::kReference;
  const int stages = log2_exact(static_cast<std::size_t>(N / 2));
  plan.schedule_ = schedule.value_or(ScalingSchedule::none(stages));
  if (plan.schedule_.size() != stages) throw std::invalid_argument("schedule length must be log2(N/2)");
  plan.build_tables();
  return plan;
}

FftPlan FftPlan::fixed(int N, FftDirection direction, const FixedPointFormat& logical_format,
                       const FixedPointFormat& twiddle_format, std::optional<ScalingSchedule> schedule,
                       RoundingMode rounding) {
  if (N < 2 || !is_power_of_two(static_cast<std::size_t>(N))) throw std::invalid_argument("N must be a power of two");
  logical_format.validate();
  twiddle_format.validate();
  if (twiddle_format.integer_bits < 2) throw std::invalid_argument("twiddle format needs 2 integer bits to hold 1.0");
  FftPlan plan;
  plan.ring_degree_ = N;
  plan.direction_ = direction;
  plan.arithmetic_ = FftArithmetic::kFixed;
  const int stages = log2_exact(static_cast<std::size_t>(N / 2));
  plan.schedule_ = schedule.value_or(ScalingSchedule::msb_tracking(stages));
  if (plan.schedule_.size() != stages) throw std::invalid_argument("schedule length must be log2(N/2)");
  plan.logical_format_ = logical_format;
  plan.stored_format_ = logical_format.reinterpreted(-plan.schedule_.scaled_count());
  plan.twiddle_format_ = twiddle_format;
  plan.rounding_ = rounding;
  plan.build_tables();
  return plan;
}

void FftPlan::build_tables() {
  const int m = size();
  const int stages_count = schedule_.size();
  bitrev_.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::uint32_t r = 0;
    for (int b = 0; b < stages_count; ++b) r |= ((static_cast<std::uint32_t>(i) >> b) & 1U) << (stages_count - 1 - b);
    bitrev_[static_cast<std::size_t>(i)] = r;
  }
  const long double sign = direction_ == FftDirection::kForward ? -1.0L : 1.0L;
  twiddles_ = roots(std::max(1, m / 2), sign * 2.0L * std::numbers::pi_v<long double> / m);
  twist_ = roots(m, -sign * std::numbers::pi_v<long double> / ring_degree_);
  if (is_fixed()) {
    // Twiddles are rounded to nearest once per plan.
    OverflowPolicy policy(OverflowMode::kTrap);
    fixed_twiddles_.clear();
    fixed_twist_.clear();
    for (const auto& w : twiddles_) {
      fixed_twiddles_.push_back(GaussTwiddle::quantized(w, twiddle_format_, RoundingMode::kHalfUp, policy));
    }
    for (const auto& w : twist_) {
      fixed_twist_.push_back(GaussTwiddle::quantized(w, twiddle_format_, RoundingMode::kHalfUp, policy));
    }
  }
}

std::string FftPlan::describe() const {
  std::string s = std::string(direction_ == FftDirection::kForward ? "forward" : "inverse") + " N=" +
                  std::to_string(ring_degree_) + " schedule=" + schedule_.to_string();
  if (is_fixed()) {
    s += " logical=" + logical_format_.to_string() + " stored=" + stored_format_.to_string() +
         " twiddle=" + twiddle_format_.to_string() + " rounding=" + fxtfhe::to_string(rounding_);
  } else {
    s += " reference";
  }
  return s;
}

// ---- transforms -----------------------------------------------------------

struct FftKernels {
  static void stages_reference(const FftPlan& plan, std::vector<cplx>& z, TapSink* taps) {
    const std::size_t m = z.size();
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t r = plan.bitrev_[i];
      if (r > i) std::swap(z[i], z[r]);
    }
    int s = 0;
    for (std::size_t len = 1; len < m; len <<= 1, ++s) {
      const std::size_t step = m / (2 * len);
      const bool halve = plan.schedule_.scaled(s);
      for (std::size_t i = 0; i < m; i += 2 * len) {
        for (std::size_t j = 0; j < len; ++j) {
          cplx t = plan.twiddles_[j * step] * z[i + j + len];
          cplx u = z[i + j];
          cplx x0 = u + t;
          cplx x1 = u - t;
          if (halve) {
            x0 *= 0.5;
            x1 *= 0.5;
          }
          z[i + j] = x0;
          z[i + j + len] = x1;
        }
      }
      if (taps) record_complex(taps, stage_tap(prefix_of(plan.direction_), s), z);
    }
  }

  template <RoundingMode RM>
  static void stages_narrow(const FftPlan& plan, std::vector<std::int64_t>& re, std::vector<std::int64_t>& im,
                            OverflowPolicy& policy, TapSink* taps) {
    const std::size_t m = re.size();
    const FixedPointFormat& fmt = plan.stored_format_;
    const std::int64_t lo = fmt.min_raw();
    const std::int64_t hi = fmt.max_raw();
    const int fw = plan.twiddle_format_.fractional_bits;
    std::int64_t* xr = re.data();
    std::int64_t* xi = im.data();
    int s = 0;
    for (std::size_t len = 1; len < m; len <<= 1, ++s) {
      const std::size_t step = m / (2 * len);
      const bool scaled = plan.schedule_.scaled(s);
      for (std::size_t i = 0; i < m; i += 2 * len) {
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t a = i + j;
          const std::size_t b = a + len;
          std::int64_t tr = 0;
          std::int64_t ti = 0;
          fx::gauss_cmul_narrow<RM>(xr[b], xi[b], fw, plan.fixed_twiddles_[j * step], fmt, lo, hi, policy, tr, ti);
          const std::int64_t ur = xr[a];
          const std::int64_t ui = xi[a];
          if (scaled) {
            xr[a] = fx::fit64(fx::shift_right<RM>(ur + tr, 1), lo, hi, fmt, policy);
            xi[a] = fx::fit64(fx::shift_right<RM>(ui + ti, 1), lo, hi, fmt, policy);
            xr[b] = fx::fit64(fx::shift_right<RM>(ur - tr, 1), lo, hi, fmt, policy);
            xi[b] = fx::fit64(fx::shift_right<RM>(ui - ti, 1), lo, hi, fmt, policy);
          } else {
            xr[a] = fx::fit64(ur + tr, lo, hi, fmt, policy);
            xi[a] = fx::fit64(ui + ti, lo, hi, fmt, policy);
            xr[b] = fx::fit64(ur - tr, lo, hi, fmt, policy);
            xi[b] = fx::fit64(ui - ti, lo, hi, fmt, policy);
          }
        }
      }
      if (taps) record_fixed(taps, stage_tap(prefix_of(plan.direction_), s), re, im, fmt);
    }
  }

  // Pointwise multiply by the fixed twist factors.
  static void twist_fixed(const FftPlan& plan, std::vector<std::int64_t>& re, std::vector<std::int64_t>& im,
                          OverflowPolicy& policy) {
    const FixedPointFormat& fmt = plan.stored_format_;
    const int fw = plan.twiddle_format_.fractional_bits;
    if (fx::narrow_product(fmt.width, plan.twiddle_format_.width) && fw >= 1) {
      const std::int64_t lo = fmt.min_raw();
      const std::int64_t hi = fmt.max_raw();
      fx::with_rounding(plan.rounding_, [&](auto tag) {
        for (std::size_t i = 0; i < re.size(); ++i) {
          fx::gauss_cmul_narrow<decltype(tag)::value>(re[i], im[i], fw, plan.fixed_twist_[i], fmt, lo, hi, policy,
                                                      re[i], im[i]);
        }
      });
      return;
    }
    for (std::size_t i = 0; i < re.size(); ++i) {
      std::int64_t r = 0;
      std::int64_t q = 0;
      fx::gauss_cmul(re[i], im[i], fmt.fractional_bits, plan.fixed_twist_[i], fmt, plan.rounding_, policy, r, q);
      re[i] = r;
      im[i] = q;
    }
  }

  static void stages_fixed(const FftPlan& plan, std::vector<std::int64_t>& re, std::vector<std::int64_t>& im,
                           OverflowPolicy& policy, TapSink* taps) {
    const std::size_t m = re.size();
    const FixedPointFormat& fmt = plan.stored_format_;
    const int f = fmt.fractional_bits;
    const RoundingMode rm = plan.rounding_;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t r = plan.bitrev_[i];
      if (r > i) {
        std::swap(re[i], re[r]);
        std::swap(im[i], im[r]);
      }
    }
    const int fw = plan.twiddle_format_.fractional_bits;
    if (fx::narrow_product(fmt.width, plan.twiddle_format_.width) && fw >= 1) {
      fx::with_rounding(rm, [&](auto tag) { stages_narrow<decltype(tag)::value>(plan, re, im, policy, taps); });
      return;
    }
    int s = 0;
    for (std::size_t len = 1; len < m; len <<= 1, ++s) {
      const std::size_t step = m / (2 * len);
      const int shift = plan.schedule_.scaled(s) ? 1 : 0;
      for (std::size_t i = 0; i < m; i += 2 * len) {
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t a = i + j;
          const std::size_t b = a + len;
          std::int64_t tr = 0;
          std::int64_t ti = 0;
          fx::gauss_cmul(re[b], im[b], f, plan.fixed_twiddles_[j * step], fmt, rm, policy, tr, ti);
          const int128 ur = re[a];
          const int128 ui = im[a];
          re[a] = fx::fit(fx::round_shift(ur + tr, shift, rm), fmt, policy);
          im[a] = fx::fit(fx::round_shift(ui + ti, shift, rm), fmt, policy);
          re[b] = fx::fit(fx::round_shift(ur - tr, shift, rm), fmt, policy);
          im[b] = fx::fit(fx::round_shift(ui - ti, shift, rm), fmt, policy);
        }
      }
      if (taps) record_fixed(taps, stage_tap(prefix_of(plan.direction_), s), re, im, fmt);
    }
  }

  static FftDomainPoly forward(std::span<const double> x, const FftPlan& plan, OverflowPolicy& policy,
                               TapSink* taps) {
    if (plan.direction_ != FftDirection::kForward) throw std::invalid_argument("plan is not a forward plan");
    if (x.size() != static_cast<std::size_t>(plan.ring_degree_)) {
      throw std::invalid_argument("polynomial length does not match plan");
    }
    const std::size_t m = static_cast<std::size_t>(plan.size());
    const int scale = plan.schedule_.scaled_count();
    if (!plan.is_fixed()) {
      std::vector<cplx> z = fold(x);
      if (taps) record_complex(taps, "fft.input", z);
      for (std::size_t i = 0; i < m; ++i) z[i] *= plan.twist_[i];
      if (taps) record_complex(taps, "fft.twisted", z);
      stages_reference(plan, z, taps);
      if (taps) record_complex(taps, "fft.output", z);
      return FftDomainPoly::reference(std::move(z), scale);
    }
    const FixedPointFormat& fmt = plan.stored_format_;
    std::vector<std::int64_t> re(m);
    std::vector<std::int64_t> im(m);
    for (std::size_t i = 0; i < m; ++i) {
      re[i] = quantize(x[i], fmt, plan.rounding_, policy).raw;
      im[i] = quantize(x[i + m], fmt, plan.rounding_, policy).raw;
    }
    if (taps) record_fixed(taps, "fft.input", re, im, fmt);
    twist_fixed(plan, re, im, policy);
    if (taps) record_fixed(taps, "fft.twisted", re, im, fmt);
    stages_fixed(plan, re, im, policy, taps);
    if (taps) record_fixed(taps, "fft.output", re, im, fmt);
    return FftDomainPoly::fixed(std::move(re), std::move(im), fmt, scale);
  }

  // Untwisted inverse output: stored values and the exponent e such that
  // real value = stored * 2^e.
  struct InverseResult {
    std::vector<cplx> values;
    std::vector<std::int64_t> re;
    std::vector<std::int64_t> im;
    int exponent = 0;
  };

  static InverseResult inverse(const FftDomainPoly& f, const FftPlan& plan, OverflowPolicy& policy, TapSink* taps) {
    if (plan.direction_ != FftDirection::kInverse) throw std::invalid_argument("plan is not an inverse plan");
    const std::size_t m = static_cast<std::size_t>(plan.size());
    if (f.size() != m) throw std::invalid_argument("spectrum length does not match plan");
    const int log_m = plan.schedule_.size();
    const int total_scale = f.scale_exponent() + plan.schedule_.scaled_count();
    InverseResult out;
    if (!plan.is_fixed()) {
      std::vector<cplx> z(m);
      for (std::size_t i = 0; i < m; ++i) z[i] = f.stored(i);
      if (taps) record_complex(taps, "ifft.input", z);
      stages_reference(plan, z, taps);
      for (std::size_t i = 0; i < m; ++i) z[i] *= plan.twist_[i];
      if (taps) record_complex(taps, "ifft.output", z);
      out.values = std::move(z);
      out.exponent = total_scale - log_m;
      return out;
    }
    if (!f.is_fixed()) throw std::invalid_argument("fixed inverse plan needs a fixed-point spectrum");
    const FixedPointFormat& fmt = plan.stored_format_;
    std::vector<std::int64_t> re = f.re();
    std::vector<std::int64_t> im = f.im();
    if (!(f.format() == fmt)) {
      const int s = f.format().fractional_bits - fmt.fractional_bits;
      for (std::size_t i = 0; i < m; ++i) {
        re[i] = fx::fit(fx::round_shift(re[i], s, plan.rounding_), fmt, policy);
        im[i] = fx::fit(fx::round_shift(im[i], s, plan.rounding_), fmt, policy);
      }
    }
    if (taps) record_fixed(taps, "ifft.input", re, im, fmt);
    stages_fixed(plan, re, im, policy, taps);
    twist_fixed(plan, re, im, policy);
    if (taps) record_fixed(taps, "ifft.output", re, im, fmt);
    out.re = std::move(re);
    out.im = std::move(im);
    out.exponent = total_scale - log_m - fmt.fractional_bits;
    return out;
  }
};

FftDomainPoly fft_forward(std::span<const double> coeffs, const FftPlan& plan, OverflowPolicy& policy,
                          TapSink* taps) {
  return FftKernels::forward(coeffs, plan, policy, taps);
}

FftDomainPoly fft_forward(const TorusPolynomial& p, const FftPlan& plan, OverflowPolicy& policy, TapSink* taps) {
  auto x = torus_to_reals(p);
  return FftKernels::forward(x, plan, policy, taps);
}

FftDomainPoly fft_forward(const IntPolynomial& p, const FftPlan& plan, OverflowPolicy& policy, TapSink* taps) {
  auto x = int_to_reals(p);
  return FftKernels::forward(x, plan, policy, taps);
}

std::vector<double> fft_inverse_real(const FftDomainPoly& f, const FftPlan& plan, OverflowPolicy& policy,
                                     TapSink* taps) {
  auto r = FftKernels::inverse(f, plan, policy, taps);
  const std::size_t m = static_cast<std::size_t>(plan.size());
  std::vector<double> out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    if (plan.is_fixed()) {
      out[i] = std::ldexp(static_cast<double>(r.re[i]), r.exponent);
      out[i + m] = std::ldexp(static_cast<double>(r.im[i]), r.exponent);
    } else {
      out[i] = std::ldexp(r.values[i].real(), r.exponent);
      out[i + m] = std::ldexp(r.values[i].imag(), r.exponent);
    }
  }
  return out;
}

namespace {

Torus32 raw_to_torus(std::int64_t raw, int exponent) {
  // raw * 2^exponent in torus units is raw * 2^{exponent + 32}.
  int128 v = fx::round_shift(raw, -(exponent + 32), RoundingMode::kHalfUp);
  return static_cast<Torus32>(static_cast<unsigned __int128>(v));
}

}  // namespace

TorusPolynomial fft_inverse(const FftDomainPoly& f, const FftPlan& plan, OverflowPolicy& policy, TapSink* taps) {
  auto r = FftKernels::inverse(f, plan, policy, taps);
  const std::size_t m = static_cast<std::size_t>(plan.size());
  TorusPolynomial out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    if (plan.is_fixed()) {
      out[i] = raw_to_torus(r.re[i], r.exponent);
      out[i + m] = raw_to_torus(r.im[i], r.exponent);
    } else {
      out[i] = double_to_torus(std::ldexp(r.values[i].real(), r.exponent));
      out[i + m] = double_to_torus(std::ldexp(r.values[i].imag(), r.exponent));
    }
  }
  return out;
}

void pointwise_mac(FftDomainPoly& acc, const FftDomainPoly& a, const FftDomainPoly& bk, RoundingMode rounding,
                   OverflowPolicy& policy) {
  const std::size_t m = acc.size();
  if (a.size() != m || bk.size() != m) throw std::invalid_argument("pointwise_mac size mismatch");
  if (acc.scale_exponent() != 0) throw std::invalid_argument("accumulator must be at logical scale");
  if (acc.is_fixed() != a.is_fixed() || acc.is_fixed() != bk.is_fixed()) {
    throw std::invalid_argument("pointwise_mac operands mix reference and fixed arithmetic");
  }
  if (!acc.is_fixed()) {
    auto& v = acc.values();
    for (std::size_t i = 0; i < m; ++i) v[i] += a.logical(i) * bk.logical(i);
    return;
  }
  const FixedPointFormat out = acc.format();
  const int fa = a.format().fractional_bits - a.scale_exponent();
  FixedPointFormat bk_fmt = bk.format().reinterpreted(bk.scale_exponent());
  auto& re = acc.re();
  auto& im = acc.im();
  const int shift = bk_fmt.fractional_bits + fa - out.fractional_bits;
  if (fx::narrow_product(a.format().width, bk_fmt.width) && shift >= 1 && out.width <= 62) {
    const std::int64_t lo = out.min_raw();
    const std::int64_t hi = out.max_raw();
    fx::with_rounding(rounding, [&](auto tag) {
      for (std::size_t i = 0; i < m; ++i) {
        const GaussTwiddle w = GaussTwiddle::from(bk.re()[i], bk.im()[i], bk_fmt);
        std::int64_t pr = 0;
        std::int64_t pi = 0;
        fx::gauss_cmul_narrow<decltype(tag)::value>(a.re()[i], a.im()[i], shift, w, out, lo, hi, policy, pr, pi);
        re[i] = fx::fit64(re[i] + pr, lo, hi, out, policy);
        im[i] = fx::fit64(im[i] + pi, lo, hi, out, policy);
      }
    });
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    GaussTwiddle w = GaussTwiddle::from(bk.re()[i], bk.im()[i], bk_fmt);
    std::int64_t pr = 0;
    std::int64_t pi = 0;
    fx::gauss_cmul(a.re()[i], a.im()[i], fa, w, out, rounding, policy, pr, pi);
    re[i] = fx::fit(static_cast<int128>(re[i]) + pr, out, policy);
    im[i] = fx::fit(static_cast<int128>(im[i]) + pi, out, policy);
  }
}

// ---- DatapathFormats / TransformPlans -------------------------------------

FixedPointFormat DatapathFormats::default_twiddle(const FixedPointFormat& data) {
  return FixedPointFormat::make(2, data.width - 4 - 2);
}

DatapathFormats DatapathFormats::make(const FixedPointFormat& bk, const FixedPointFormat& fft,
                                      const FixedPointFormat& ifft) {
  return {bk, fft, ifft, default_twiddle(fft), default_twiddle(ifft)};
}

DatapathFormats DatapathFormats::table3(const TfheParams& params) {
  if (params.k == 2 && params.N == 512) {
    return make(FixedPointFormat::make(7, 19), FixedPointFormat::make(15, 14), FixedPointFormat::make(23, 6));
  }
  if (params.k == 1 && params.N == 1024) {
    return make(FixedPointFormat::make(8, 19), FixedPointFormat::make(18, 12), FixedPointFormat::make(27, 3));
  }
  throw std::invalid_argument("no preset formats for parameter set " + params.name);
}

namespace {

DatapathFormats parse_formats(std::string_view text, const DatapathFormats& base, bool require_all) {
  DatapathFormats out = base;
  bool bk_set = false;
  bool fft_set = false;
  bool ifft_set = false;
  bool fft_twiddle_set = false;
  bool ifft_twiddle_set = false;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("format entry must be key=w:i:f");
    std::string_view key = item.substr(0, eq);
    FixedPointFormat fmt = FixedPointFormat::parse(item.substr(eq + 1));
    if (key == "bk") {
      out.bk = fmt;
      bk_set = true;
    } else if (key == "fft") {
      out.fft = fmt;
      fft_set = true;
    } else if (key == "ifft") {
      out.ifft = fmt;
      ifft_set = true;
    } else if (key == "fft_twiddle") {
      out.fft_twiddle = fmt;
      fft_twiddle_set = true;
    } else if (key == "ifft_twiddle") {
      out.ifft_twiddle = fmt;
      ifft_twiddle_set = true;
    } else {
      throw std::invalid_argument("unknown format key: " + std::string(key));
    }
  }
  if (require_all && !(bk_set && fft_set && ifft_set)) {
    throw std::invalid_argument("formats need bk, fft and ifft entries");
  }
  if (!fft_twiddle_set) out.fft_twiddle = DatapathFormats::default_twiddle(out.fft);
  if (!ifft_twiddle_set) out.ifft_twiddle = DatapathFormats::default_twiddle(out.ifft);
  return out;
}

}  // namespace

DatapathFormats DatapathFormats::parse(std::string_view text, const DatapathFormats& base) {
  return parse_formats(text, base, false);
}

DatapathFormats DatapathFormats::parse(std::string_view text) { return parse_formats(text, {}, true); }

std::string DatapathFormats::to_string() const {
  return "bk=" + bk.to_string() + ",fft=" + fft.to_string() + ",ifft=" + ifft.to_string() +
         ",fft_twiddle=" + fft_twiddle.to_string() + ",ifft_twiddle=" + ifft_twiddle.to_string();
}

TransformPlans TransformPlans::reference(int N) {
  return {FftPlan::reference(N, FftDirection::kForward), FftPlan::reference(N, FftDirection::kInverse),
          std::nullopt};
}

TransformPlans TransformPlans::fixed(int N, const DatapathFormats& formats, RoundingMode rounding,
                                     std::optional<ScalingSchedule> schedule) {
  formats.bk.validate();
  TransformPlans p{FftPlan::fixed(N, FftDirection::kForward, formats.fft, formats.fft_twiddle, schedule, rounding),
                   FftPlan::fixed(N, FftDirection::kInverse, formats.ifft, formats.ifft_twiddle, schedule, rounding),
                   formats.bk};
  p.datapath_rounding = rounding;
  return p;
}

FftDomainPoly TransformPlans::zero_accumulator() const {
  const auto m = static_cast<std::size_t>(inverse.size());
  return is_fixed() ? FftDomainPoly::zero_fixed(m, inverse.stored_format()) : FftDomainPoly::zero_reference(m);
}

FftDomainPoly TransformPlans::convert_bk(const TorusPolynomial& p, OverflowPolicy& policy) const {
  static thread_local std::vector<FftPlan> cache;
  const FftPlan* plan = nullptr;
  for (const auto& c : cache) {
    if (c.ring_degree() == ring_degree()) plan = &c;
  }
  if (!plan) {
    cache.push_back(FftPlan::reference(ring_degree(), FftDirection::kForward));
    plan = &cache.back();
  }
  OverflowPolicy unused;
  return quantize_bk(fft_forward(p, *plan, unused), policy);
}

FftDomainPoly TransformPlans::quantize_bk(const FftDomainPoly& reference_spectrum, OverflowPolicy& policy) const {
  if (reference_spectrum.is_fixed()) throw std::invalid_argument("BK spectrum must come from the reference path");
  if (!bk_format) return reference_spectrum.at_logical_scale();
  const std::size_t m = reference_spectrum.size();
  std::vector<std::int64_t> re(m);
  std::vector<std::int64_t> im(m);
  for (std::size_t i = 0; i < m; ++i) {
    cplx v = reference_spectrum.logical(i);
    re[i] = quantize(v.real(), *bk_format, bk_rounding, policy).raw;
    im[i] = quantize(v.imag(), *bk_format, bk_rounding, policy).raw;
  }
  return FftDomainPoly::fixed(std::move(re), std::move(im), *bk_format, 0);
}

TorusPolynomial negacyclic_multiply(const TorusPolynomial& p, const IntPolynomial& q, const TransformPlans& plans,
                                    OverflowPolicy& policy) {
  if (p.size() != static_cast<std::size_t>(plans.ring_degree()) || q.size() != p.size()) {
    throw std::invalid_argument("polynomial length does not match plan");
  }
  FftDomainPoly pf = plans.convert_bk(p, policy);
  FftDomainPoly qf = fft_forward(q, plans.forward, policy);
  FftDomainPoly acc = plans.zero_accumulator();
  pointwise_mac(acc, qf, pf, plans.datapath_rounding, policy);
  return fft_inverse(acc, plans.inverse, policy);
}

void write_spectrum_csv(std::ostream& out, const FftDomainPoly& f) {
  out << "index,re,im,scale\n";
  out.precision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    cplx v = f.stored(i);
    out << i << ',' << v.real() << ',' << v.imag() << ',' << f.scale() << '\n';
  }
}

}  // namespace fxtfhe

#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxtfhe/fixed_point.hpp"
#include "fxtfhe/params.hpp"
#include "fxtfhe/torus.hpp"

namespace fxtfhe {

using cplx = std::complex<double>;

enum class FftDirection { kForward, kInverse };
enum class FftArithmetic { kReference, kFixed };

// Per-stage halving flags, stage 0 first.
class ScalingSchedule {
 public:
  ScalingSchedule() = default;
  explicit ScalingSchedule(std::vector<bool> stages) : stages_(std::move(stages)) {}

  static ScalingSchedule none(int stages);
  static ScalingSchedule all(int stages);
  // Halve after stages 1, 3, 5, ...: the stddev of butterfly outputs grows by
  // sqrt(2) per stage, so the MSB grows one bit every two stages.
  static ScalingSchedule msb_tracking(int stages);
  // "none", "all", "msb-tracking" or an explicit bit string such as "01010101".
  static ScalingSchedule parse(std::string_view text, int stages);

  int size() const { return static_cast<int>(stages_.size()); }
  bool scaled(int stage) const { return stages_.at(static_cast<std::size_t>(stage)); }
  int scaled_count() const;
  std::string to_string() const;
  bool operator==(const ScalingSchedule&) const = default;

 private:
  std::vector<bool> stages_;
};

// FFT-domain polynomial of N/2 complex values. Stored values equal logical
// values times 2^{-scale_exponent}.
class FftDomainPoly {
 public:
  FftDomainPoly() = default;
  static FftDomainPoly reference(std::vector<cplx> values, int scale_exponent = 0);
  static FftDomainPoly fixed(std::vector<std::int64_t> re, std::vector<std::int64_t> im, const FixedPointFormat& fmt,
                             int scale_exponent = 0);
  static FftDomainPoly zero_reference(std::size_t size);
  static FftDomainPoly zero_fixed(std::size_t size, const FixedPointFormat& fmt);

  FftArithmetic arithmetic() const { return arithmetic_; }
  bool is_fixed() const { return arithmetic_ == FftArithmetic::kFixed; }
  std::size_t size() const { return is_fixed() ? re_.size() : values_.size(); }
  int scale_exponent() const { return scale_exponent_; }
  // Cumulative schedule factor 2^{-scale_exponent}.
  double scale() const;
  const FixedPointFormat& format() const { return format_; }

  cplx stored(std::size_t i) const;
  cplx logical(std::size_t i) const;

  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }
  std::vector<std::int64_t>& re() { return re_; }
  const std::vector<std::int64_t>& re() const { return re_; }
  std::vector<std::int64_t>& im() { return im_; }
  const std::vector<std::int64_t>& im() const { return im_; }

  // Same stored words, scale folded into the format (fixed) or values (reference).
  FftDomainPoly at_logical_scale() const;

 private:
  FftArithmetic arithmetic_ = FftArithmetic::kReference;
  std::vector<cplx> values_;
  std::vector<std::int64_t> re_;
  std::vector<std::int64_t> im_;
  FixedPointFormat format_;
  int scale_exponent_ = 0;
};

// Receives values at named datapath points, in stored units, complex values
// flattened as (re, im) pairs.
class TapSink {
 public:
  virtual ~TapSink() = default;
  virtual void record(std::string_view tap, std::span<const double> values) = 0;
};

class FftPlan {
 public:
  static FftPlan reference(int N, FftDirection direction, std::optional<ScalingSchedule> schedule = std::nullopt);
  // logical_format describes the unscaled values; the datapath stores them in
  // stored_format(), which moves the binary point by the number of halvings.
  static FftPlan fixed(int N, FftDirection direction, const FixedPointFormat& logical_format,
                       const FixedPointFormat& twiddle_format, std::optional<ScalingSchedule> schedule = std::nullopt,
                       RoundingMode rounding = kDefaultDatapathRounding);

  int ring_degree() const { return ring_degree_; }
  int size() const { return ring_degree_ / 2; }
  int stages() const { return schedule_.size(); }
  FftDirection direction() const { return direction_; }
  FftArithmetic arithmetic() const { return arithmetic_; }
  bool is_fixed() const { return arithmetic_ == FftArithmetic::kFixed; }
  const ScalingSchedule& schedule() const { return schedule_; }
  const FixedPointFormat& logical_format() const { return logical_format_; }
  const FixedPointFormat& stored_format() const { return stored_format_; }
  const FixedPointFormat& twiddle_format() const { return twiddle_format_; }
  RoundingMode rounding() const { return rounding_; }
  std::string describe() const;

 private:
  friend struct FftKernels;
  FftPlan() = default;
  void build_tables();

  int ring_degree_ = 0;
  FftDirection direction_ = FftDirection::kForward;
  FftArithmetic arithmetic_ = FftArithmetic::kReference;
  ScalingSchedule schedule_;
  FixedPointFormat logical_format_;
  FixedPointFormat stored_format_;
  FixedPointFormat twiddle_format_;
  RoundingMode rounding_ = kDefaultDatapathRounding;

  std::vector<std::uint32_t> bitrev_;
  std::vector<cplx> twiddles_;        // W^t, t < size/2
  std::vector<cplx> twist_;           // psi^{+-i}, i < size
  std::vector<GaussTwiddle> fixed_twiddles_;
  std::vector<GaussTwiddle> fixed_twist_;
};

// Helpers on double vectors.
std::vector<cplx> fold(std::span<const double> p);
std::vector<double> unfold(std::span<const cplx> v);
std::vector<cplx> twist(std::span<const cplx> v, int N);
std::vector<cplx> untwist(std::span<const cplx> v, int N);

std::vector<double> torus_to_reals(const TorusPolynomial& p);
std::vector<double> int_to_reals(const IntPolynomial& p);

FftDomainPoly fft_forward(std::span<const double> coeffs, const FftPlan& plan, OverflowPolicy& policy,
                          TapSink* taps = nullptr);
FftDomainPoly fft_forward(const TorusPolynomial& p, const FftPlan& plan, OverflowPolicy& policy,
                          TapSink* taps = nullptr);
FftDomainPoly fft_forward(const IntPolynomial& p, const FftPlan& plan, OverflowPolicy& policy,
                          TapSink* taps = nullptr);

// Real coefficients of the inverse transform (scale and 1/(N/2) compensated),
// before rounding to the torus grid.
std::vector<double> fft_inverse_real(const FftDomainPoly& f, const FftPlan& plan, OverflowPolicy& policy,
                                     TapSink* taps = nullptr);
// Inverse transform with one final round-half-up to the 32-bit torus grid.
TorusPolynomial fft_inverse(const FftDomainPoly& f, const FftPlan& plan, OverflowPolicy& policy,
                            TapSink* taps = nullptr);

// acc += a * bk elementwise. On the fixed path the product uses the
// 3-multiply form with bk as the precomputed operand, rounded into acc's format.
void pointwise_mac(FftDomainPoly& acc, const FftDomainPoly& a, const FftDomainPoly& bk, RoundingMode rounding,
                   OverflowPolicy& policy);

// Formats of the three quantized quantities plus the twiddles.
struct DatapathFormats {
  FixedPointFormat bk;
  FixedPointFormat fft;
  FixedPointFormat ifft;
  FixedPointFormat fft_twiddle;
  FixedPointFormat ifft_twiddle;

  // Width - 4 with two integer bits.
  static FixedPointFormat default_twiddle(const FixedPointFormat& data);
  static DatapathFormats make(const FixedPointFormat& bk, const FixedPointFormat& fft, const FixedPointFormat& ifft);
  static DatapathFormats table3(const TfheParams& params);
  // "bk=26:7:19,fft=29:15:14,ifft=29:23:6[,fft_twiddle=..,ifft_twiddle=..]"
  // applied on top of `base`.
  static DatapathFormats parse(std::string_view text, const DatapathFormats& base);
  // Same syntax without a base; bk, fft and ifft are required.
  static DatapathFormats parse(std::string_view text);
  std::string to_string() const;
  bool operator==(const DatapathFormats&) const = default;
};

// Forward plan for digits, inverse plan for accumulators, and the BK format.
struct TransformPlans {
  FftPlan forward;
  FftPlan inverse;
  std::optional<FixedPointFormat> bk_format;
  RoundingMode datapath_rounding = kDefaultDatapathRounding;
  // Host-side BK quantization happens once, offline.
  RoundingMode bk_rounding = RoundingMode::kHalfUp;

  static TransformPlans reference(int N);
  static TransformPlans fixed(int N, const DatapathFormats& formats,
                              RoundingMode rounding = kDefaultDatapathRounding,
                              std::optional<ScalingSchedule> schedule = std::nullopt);

  bool is_fixed() const { return forward.is_fixed(); }
  int ring_degree() const { return forward.ring_degree(); }
  // Empty accumulator in the inverse plan's input format.
  FftDomainPoly zero_accumulator() const;
  // Spectrum of a BK polynomial: double-precision FFT, then quantization at
  // the BK format on the fixed path.
  FftDomainPoly convert_bk(const TorusPolynomial& p, OverflowPolicy& policy) const;
  FftDomainPoly quantize_bk(const FftDomainPoly& reference_spectrum, OverflowPolicy& policy) const;
};

TorusPolynomial negacyclic_multiply(const TorusPolynomial& p, const IntPolynomial& q, const TransformPlans& plans,
                                    OverflowPolicy& policy);

// CSV rows "index,re,im,scale" in stored units.
void write_spectrum_csv(std::ostream& out, const FftDomainPoly& f);

}  // namespace fxtfhe

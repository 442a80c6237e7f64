#pragma once

#include <stdexcept>
#include <string>

#include "fxtfhe/params.hpp"

namespace fxtfhe {

enum class UnrollStyle { kFftUnrolled, kDotproductUnrolled };

UnrollStyle parse_unroll_style(const std::string& text);
std::string to_string(UnrollStyle style);

struct PipelineConfig {
  TfheParams params;
  double clock_hz = 200e6;
  UnrollStyle style = UnrollStyle::kFftUnrolled;
  int sw_fft = 128;   // complex coefficients per cycle
  int sw_ifft = 64;
  int n_fft_kernels = 1;
  int n_ifft_kernels = 1;
  int cmux_latency_cycles = 156;
  int bk_width_bits = 26;
  // Stored bytes per unpacked byte.
  double bk_packing = 1.0;

  // Throws std::invalid_argument when a structural invariant is violated.
  void validate() const;

  // 200 MHz, FFT-unrolled, sw_fft = 128, with the reported CMUX latency and
  // BK width of each set.
  static PipelineConfig preset(const std::string& set_name);
  // Dotproduct-unrolled with (k+1)l FFT and (k+1) IFFT kernels whose
  // width gives the same cycles per CMUX as `fft_unrolled`.
  static PipelineConfig dotproduct_iso(const PipelineConfig& fft_unrolled);
};

struct PipelineReport {
  long cycles_per_cmux = 0;
  long batch_size = 0;
  double latency_ms = 0.0;
  double throughput_pbs_per_ms = 0.0;
  double bk_entry_bytes = 0.0;
  double onchip_bw_bytes_per_s = 0.0;
  double offchip_bw_bytes_per_s = 0.0;
  double full_bk_bytes = 0.0;
};

class BatchSizeError : public std::invalid_argument {
 public:
  BatchSizeError(const std::string& what, long nearest) : std::invalid_argument(what), nearest_(nearest) {}
  long nearest_valid() const { return nearest_; }

 private:
  long nearest_;
};

long cycles_per_cmux(const PipelineConfig& cfg);
// cmux_latency_cycles / cycles_per_cmux; throws BatchSizeError if inexact.
long batch_size(const PipelineConfig& cfg);

struct LatencyThroughput {
  double latency_ms = 0.0;
  double throughput_pbs_per_ms = 0.0;
};
LatencyThroughput latency_throughput(const PipelineConfig& cfg);

struct BkBandwidth {
  double entry_bytes = 0.0;
  double onchip_bytes_per_s = 0.0;
  double offchip_bytes_per_s = 0.0;
  double full_bk_bytes = 0.0;
};
BkBandwidth bk_bandwidth(const PipelineConfig& cfg);

PipelineReport evaluate(const PipelineConfig& cfg);

std::string to_json(const PipelineReport& report, const PipelineConfig& cfg);
std::string to_csv(const PipelineReport& report, const PipelineConfig& cfg);
// Reads a JSON object whose fields override `base`.
PipelineConfig pipeline_config_from_json(const std::string& text, const PipelineConfig& base);

}  // namespace fxtfhe

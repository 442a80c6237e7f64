#include "fxtfhe/perf_model.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace fxtfhe {

UnrollStyle parse_unroll_style(const std::string& text) {
  if (text == "fft_unrolled") return UnrollStyle::kFftUnrolled;
  if (text == "dotproduct_unrolled") return UnrollStyle::kDotproductUnrolled;
  throw std::invalid_argument("unknown unroll style: " + text);
}

std::string to_string(UnrollStyle style) {
  return style == UnrollStyle::kFftUnrolled ? "fft_unrolled" : "dotproduct_unrolled";
}

void PipelineConfig::validate() const {
  params.validate();
  const int m = params.N / 2;
  const int rows = (params.k + 1) * params.l;
  const int cols = params.k + 1;
  if (clock_hz <= 0) throw std::invalid_argument("clock must be positive");
  if (sw_fft <= 0 || sw_ifft <= 0 || m % sw_fft != 0 || m % sw_ifft != 0) {
    throw std::invalid_argument("streaming widths must divide N/2");
  }
  if (n_fft_kernels < 1 || n_ifft_kernels < 1) throw std::invalid_argument("kernel counts must be >= 1");
  if (style == UnrollStyle::kFftUnrolled) {
    if (sw_fft != params.l * sw_ifft) throw std::invalid_argument("fft_unrolled needs sw_fft = l * sw_ifft");
    if (n_fft_kernels != 1 || n_ifft_kernels != 1) throw std::invalid_argument("fft_unrolled uses one kernel each");
  } else {
    if (n_fft_kernels % rows != 0) throw std::invalid_argument("dotproduct_unrolled needs n_fft = (k+1)l * n_base");
    if (n_ifft_kernels * rows != n_fft_kernels * cols) {
      throw std::invalid_argument("dotproduct_unrolled needs n_ifft = (k+1) * n_base");
    }
  }
  if (cmux_latency_cycles < 1) throw std::invalid_argument("CMUX latency must be >= 1");
  if (bk_width_bits < 1) throw std::invalid_argument("BK width must be >= 1");
  if (bk_packing <= 0) throw std::invalid_argument("BK packing must be positive");
}

PipelineConfig PipelineConfig::preset(const std::string& set_name) {
  PipelineConfig c;
  c.params = TfheParams::preset(set_name);
  c.clock_hz = 200e6;
  c.style = UnrollStyle::kFftUnrolled;
  c.sw_fft = 128;
  c.sw_ifft = 128 / c.params.l;
  if (c.params.name == "I") {
    c.cmux_latency_cycles = 156;
    c.bk_width_bits = 26;
  } else {
    c.cmux_latency_cycles = 224;
    c.bk_width_bits = 27;
  }
  return c;
}

PipelineConfig PipelineConfig::dotproduct_iso(const PipelineConfig& fft_unrolled) {
  PipelineConfig c = fft_unrolled;
  const int rows = (c.params.k + 1) * c.params.l;
  if (fft_unrolled.sw_fft % rows != 0) {
    throw std::invalid_argument("sw_fft is not divisible by (k+1)l; no integer iso-throughput width");
  }
  c.style = UnrollStyle::kDotproductUnrolled;
  c.sw_fft = fft_unrolled.sw_fft / rows;
  c.sw_ifft = c.sw_fft;
  c.n_fft_kernels = rows;
  c.n_ifft_kernels = c.params.k + 1;
  return c;
}

long cycles_per_cmux(const PipelineConfig& cfg) {
  cfg.validate();
  const long m = cfg.params.N / 2;
  const long rows = (cfg.params.k + 1L) * cfg.params.l;
  const long cols = cfg.params.k + 1L;
  const long fft_work = (m / cfg.sw_fft) * rows;
  const long ifft_work = (m / cfg.sw_ifft) * cols;
  if (fft_work % cfg.n_fft_kernels != 0 || ifft_work % cfg.n_ifft_kernels != 0) {
    throw std::invalid_argument("transform work does not divide evenly over the kernels");
  }
  return std::max(fft_work / cfg.n_fft_kernels, ifft_work / cfg.n_ifft_kernels);
}

long batch_size(const PipelineConfig& cfg) {
  const long cycles = cycles_per_cmux(cfg);
  const long latency = cfg.cmux_latency_cycles;
  if (latency % cycles != 0) {
    const long lo = std::max(1L, latency / cycles);
    const long hi = lo + 1;
    const long nearest = (latency - lo * cycles) <= (hi * cycles - latency) ? lo : hi;
    throw BatchSizeError("CMUX latency " + std::to_string(latency) + " is not a multiple of " +
                             std::to_string(cycles) + " cycles; nearest valid batch size is " +
                             std::to_string(nearest),
                         nearest);
  }
  return latency / cycles;
}

LatencyThroughput latency_throughput(const PipelineConfig& cfg) {
  const long cycles = cycles_per_cmux(cfg);
  const long b = batch_size(cfg);
  const double seconds = static_cast<double>(cfg.params.n) * static_cast<double>(b) * static_cast<double>(cycles) /
                         cfg.clock_hz;
  LatencyThroughput r;
  r.latency_ms = seconds * 1e3;
  r.throughput_pbs_per_ms = static_cast<double>(b) / r.latency_ms;
  return r;
}

BkBandwidth bk_bandwidth(const PipelineConfig& cfg) {
  const long cycles = cycles_per_cmux(cfg);
  const long b = batch_size(cfg);
  const double rows = (cfg.params.k + 1.0) * cfg.params.l;
  BkBandwidth r;
  r.entry_bytes = rows * (cfg.params.k + 1.0) * (cfg.params.N / 2.0) * 2.0 * cfg.bk_width_bits / 8.0 * cfg.bk_packing;
  r.onchip_bytes_per_s = r.entry_bytes * cfg.clock_hz / static_cast<double>(cycles);
  r.offchip_bytes_per_s = r.onchip_bytes_per_s / static_cast<double>(b);
  r.full_bk_bytes = static_cast<double>(cfg.params.n) * r.entry_bytes;
  return r;
}

PipelineReport evaluate(const PipelineConfig& cfg) {
  PipelineReport r;
  r.cycles_per_cmux = cycles_per_cmux(cfg);
  r.batch_size = batch_size(cfg);
  auto lt = latency_throughput(cfg);
  r.latency_ms = lt.latency_ms;
  r.throughput_pbs_per_ms = lt.throughput_pbs_per_ms;
  auto bw = bk_bandwidth(cfg);
  r.bk_entry_bytes = bw.entry_bytes;
  r.onchip_bw_bytes_per_s = bw.onchip_bytes_per_s;
  r.offchip_bw_bytes_per_s = bw.offchip_bytes_per_s;
  r.full_bk_bytes = bw.full_bk_bytes;
  return r;
}

namespace {

nlohmann::json config_json(const PipelineConfig& cfg) {
  return {{"param_set", cfg.params.name},
          {"clock_hz", cfg.clock_hz},
          {"style", to_string(cfg.style)},
          {"sw_fft", cfg.sw_fft},
          {"sw_ifft", cfg.sw_ifft},
          {"n_fft_kernels", cfg.n_fft_kernels},
          {"n_ifft_kernels", cfg.n_ifft_kernels},
          {"cmux_latency_cycles", cfg.cmux_latency_cycles},
          {"bk_width_bits", cfg.bk_width_bits},
          {"bk_packing", cfg.bk_packing}};
}

}  // namespace

std::string to_json(const PipelineReport& r, const PipelineConfig& cfg) {
  nlohmann::json j;
  j["config"] = config_json(cfg);
  j["cycles_per_cmux"] = r.cycles_per_cmux;
  j["batch_size"] = r.batch_size;
  j["latency_ms"] = r.latency_ms;
  j["throughput_pbs_per_ms"] = r.throughput_pbs_per_ms;
  j["bk_entry_bytes"] = r.bk_entry_bytes;
  j["onchip_bw_bytes_per_s"] = r.onchip_bw_bytes_per_s;
  j["offchip_bw_bytes_per_s"] = r.offchip_bw_bytes_per_s;
  j["full_bk_bytes"] = r.full_bk_bytes;
  return j.dump(2);
}

std::string to_csv(const PipelineReport& r, const PipelineConfig& cfg) {
  std::ostringstream os;
  os.precision(10);
  os << "param_set,style,cycles_per_cmux,batch_size,latency_ms,throughput_pbs_per_ms,bk_entry_bytes,"
        "onchip_bw_bytes_per_s,offchip_bw_bytes_per_s,full_bk_bytes\n";
  os << cfg.params.name << ',' << to_string(cfg.style) << ',' << r.cycles_per_cmux << ',' << r.batch_size << ','
     << r.latency_ms << ',' << r.throughput_pbs_per_ms << ',' << r.bk_entry_bytes << ',' << r.onchip_bw_bytes_per_s
     << ',' << r.offchip_bw_bytes_per_s << ',' << r.full_bk_bytes << '\n';
  return os.str();
}

PipelineConfig pipeline_config_from_json(const std::string& text, const PipelineConfig& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid pipeline config JSON: ") + e.what());
  }
  PipelineConfig c = base;
  try {
    if (j.contains("param_set")) c.params = TfheParams::preset(j.at("param_set").get<std::string>());
    if (j.contains("n")) c.params.n = j.at("n").get<int>();
    if (j.contains("k")) c.params.k = j.at("k").get<int>();
    if (j.contains("N")) c.params.N = j.at("N").get<int>();
    if (j.contains("l")) c.params.l = j.at("l").get<int>();
    if (j.contains("beta")) c.params.beta = j.at("beta").get<int>();
    if (j.contains("clock_hz")) c.clock_hz = j.at("clock_hz").get<double>();
    if (j.contains("style")) c.style = parse_unroll_style(j.at("style").get<std::string>());
    if (j.contains("sw_fft")) c.sw_fft = j.at("sw_fft").get<int>();
    if (j.contains("sw_ifft")) c.sw_ifft = j.at("sw_ifft").get<int>();
    if (j.contains("n_fft_kernels")) c.n_fft_kernels = j.at("n_fft_kernels").get<int>();
    if (j.contains("n_ifft_kernels")) c.n_ifft_kernels = j.at("n_ifft_kernels").get<int>();
    if (j.contains("cmux_latency_cycles")) c.cmux_latency_cycles = j.at("cmux_latency_cycles").get<int>();
    if (j.contains("bk_width_bits")) c.bk_width_bits = j.at("bk_width_bits").get<int>();
    if (j.contains("bk_packing")) c.bk_packing = j.at("bk_packing").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid pipeline config field: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace fxtfhe

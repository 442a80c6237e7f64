#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/noise_experiment.hpp"
#include "fxtfhe/noise_lab.hpp"
#include "fxtfhe/pbs.hpp"
#include "fxtfhe/perf_model.hpp"
#include "fxtfhe/serialization.hpp"

namespace fxtfhe::cli {
namespace {

using nlohmann::ordered_json;

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  return out;
}

std::string read_text(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes text to --out if given, else to stdout.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  auto f = open_out(path);
  f << text;
  if (!f) throw FileError("write to '" + path + "' failed");
}

struct RunConfig {
  std::string param_set = "I";
  std::uint64_t seed = 1;
  int trials = 1000;
  std::string fft_mode = "fixed";
  std::string formats;
  std::string rounding = to_string(kDefaultDatapathRounding);
  int jobs = 1;
  std::string out;
};

struct Resolved {
  TfheParams params;
  std::optional<DatapathFormats> formats;  // preset or file formats, after --formats
  bool fixed = true;
  RoundingMode rounding = kDefaultDatapathRounding;

  TransformPlans plans() const {
    if (!fixed) return TransformPlans::reference(params.N);
    if (!formats) throw std::invalid_argument("fixed mode needs formats; pass --formats");
    return TransformPlans::fixed(params.N, *formats, rounding);
  }
};

TfheParams params_from_json(const ordered_json& j) {
  TfheParams p;
  p.name = j.value("name", std::string("custom"));
  p.n = j.at("n").get<int>();
  p.k = j.at("k").get<int>();
  p.N = j.at("N").get<int>();
  p.beta = j.at("beta").get<int>();
  p.l = j.at("l").get<int>();
  p.sigma_tlwe = j.at("sigma_tlwe").get<double>();
  p.sigma_tglwe = j.at("sigma_tglwe").get<double>();
  p.validate();
  return p;
}

ordered_json params_json(const TfheParams& p) {
  return {{"name", p.name}, {"n", p.n},       {"k", p.k},
          {"N", p.N},       {"beta", p.beta}, {"l", p.l},
          {"sigma_tlwe", p.sigma_tlwe},       {"sigma_tglwe", p.sigma_tglwe}};
}

Resolved resolve(const RunConfig& cfg) {
  Resolved r;
  if (cfg.param_set == "I" || cfg.param_set == "II" || cfg.param_set == "1" || cfg.param_set == "2") {
    r.params = TfheParams::preset(cfg.param_set);
    r.formats = DatapathFormats::table3(r.params);
  } else {
    ordered_json j;
    try {
      j = ordered_json::parse(read_text(cfg.param_set));
      r.params = params_from_json(j.contains("params") ? j.at("params") : j);
      if (j.contains("formats")) {
        r.formats = DatapathFormats::parse(j.at("formats").get<std::string>());
      }
    } catch (const ordered_json::exception& e) {
      throw std::invalid_argument("parameter file '" + cfg.param_set + "': " + e.what());
    }
  }
  if (!cfg.formats.empty()) {
    r.formats = r.formats ? DatapathFormats::parse(cfg.formats, *r.formats) : DatapathFormats::parse(cfg.formats);
  }
  if (cfg.fft_mode == "reference") {
    r.fixed = false;
  } else if (cfg.fft_mode != "fixed") {
    throw std::invalid_argument("--fft-mode must be 'reference' or 'fixed'");
  }
  r.rounding = parse_rounding_mode(cfg.rounding);
  if (cfg.trials < 1) throw std::invalid_argument("--trials must be positive");
  if (cfg.jobs < 1) throw std::invalid_argument("--jobs must be positive");
  return r;
}

double parse_probability(const std::string& text) {
  // Accepts "2^-64" or a plain number.
  const auto caret = text.find('^');
  if (caret != std::string::npos) {
    const double base = std::stod(text.substr(0, caret));
    const double exp = std::stod(text.substr(caret + 1));
    return std::pow(base, exp);
  }
  return std::stod(text);
}

std::pair<SecretKeys, TfheParams> load_keys(const std::string& path) {
  auto in = open_in(path);
  return read_secret_keys(in);
}

BootstrappingKey load_bk(const std::string& path) {
  auto in = open_in(path);
  return read_bootstrapping_key(in);
}

TlweCiphertext load_ct(const std::string& path, const TfheParams& params) {
  auto in = open_in(path);
  return read_tlwe(in, params);
}

void save_ct(const std::string& path, const TlweCiphertext& ct, const TfheParams& params) {
  auto out = open_out(path);
  write_tlwe(out, ct, params);
}

// Plans for an existing key; the BK format must agree with the configured
// formats.
TransformPlans plans_for(const BootstrappingKey& bk, const RunConfig& cfg) {
  Resolved r;
  r.params = bk.params();
  r.fixed = bk.is_fixed();
  r.rounding = parse_rounding_mode(cfg.rounding);
  if (r.fixed) {
    std::optional<DatapathFormats> base;
    try {
      base = DatapathFormats::table3(r.params);
    } catch (const std::invalid_argument&) {
    }
    if (!cfg.formats.empty()) {
      base = base ? DatapathFormats::parse(cfg.formats, *base) : DatapathFormats::parse(cfg.formats);
    }
    if (!base) throw std::invalid_argument("fixed-point key without formats; pass --formats");
    if (!(base->bk == *bk.format())) {
      throw std::invalid_argument("bootstrapping key format " + bk.format()->to_string() +
                                  " does not match configured BK format " + base->bk.to_string());
    }
    r.formats = base;
  }
  return r.plans();
}

TestPolynomial named_lut(const std::string& name, int N, int bits) {
  const std::uint32_t mod = 1U << bits;
  std::function<std::uint32_t(std::uint32_t)> f;
  if (name == "identity") {
    f = [](std::uint32_t m) { return m; };
  } else if (name == "negate") {
    f = [mod](std::uint32_t m) { return (mod - m) % mod; };
  } else if (name == "square") {
    f = [mod](std::uint32_t m) { return (m * m) % mod; };
  } else if (name == "double") {
    f = [mod](std::uint32_t m) { return (2 * m) % mod; };
  } else {
    throw std::invalid_argument("unknown LUT '" + name + "' (identity, negate, square, double)");
  }
  return build_lut([f, bits](std::uint32_t m) { return encode_message(f(m), bits); }, N, bits);
}

void add_common(CLI::App* sub, RunConfig& cfg, bool with_out = true) {
  sub->add_option("--param-set", cfg.param_set, "I, II, or a JSON parameter file");
  sub->add_option("--seed", cfg.seed, "Top-level seed");
  sub->add_option("--fft-mode", cfg.fft_mode, "reference or fixed");
  sub->add_option("--formats", cfg.formats, "bk=w:i:f,fft=w:i:f,ifft=w:i:f[,fft_twiddle=..,ifft_twiddle=..]");
  sub->add_option("--rounding", cfg.rounding, "truncate, half-up or nearest-even");
  if (with_out) sub->add_option("--out", cfg.out, "Output path");
}

int error_json(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"kind", kind}, {"message", message}};
  err << j.dump() << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-point TFHE bootstrapping emulator"};
  app.require_subcommand(1);
  RunConfig cfg;

  // keygen
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate a secret key and a bootstrapping key");
  add_common(keygen_cmd, cfg);
  keygen_cmd->get_option("--out")->required()->description("Output directory");

  // encrypt / decrypt
  std::string key_path, in_path, in2_path, encoding = "bool", bk_path, lut = "identity", op = "nand";
  std::uint32_t message = 0;
  int message_bits = 2;
  auto* encrypt_cmd = app.add_subcommand("encrypt", "Encrypt a message under a secret key");
  add_common(encrypt_cmd, cfg);
  encrypt_cmd->add_option("--key", key_path, "Secret key file")->required();
  encrypt_cmd->add_option("--message", message, "Message (0/1 for bool)")->required();
  encrypt_cmd->add_option("--encoding", encoding, "bool or int");
  encrypt_cmd->add_option("--message-bits", message_bits, "Message bits for int encoding");
  encrypt_cmd->get_option("--out")->required();

  auto* decrypt_cmd = app.add_subcommand("decrypt", "Decrypt a TLWE ciphertext");
  add_common(decrypt_cmd, cfg);
  decrypt_cmd->add_option("--key", key_path, "Secret key file")->required();
  decrypt_cmd->add_option("--in", in_path, "Ciphertext file")->required();
  decrypt_cmd->add_option("--encoding", encoding, "bool or int");
  decrypt_cmd->add_option("--message-bits", message_bits, "Message bits for int encoding");

  auto* pbs_cmd = app.add_subcommand("pbs", "Programmable bootstrap with a named lookup table");
  add_common(pbs_cmd, cfg);
  pbs_cmd->add_option("--bk", bk_path, "Bootstrapping key file")->required();
  pbs_cmd->add_option("--in", in_path, "Ciphertext file")->required();
  pbs_cmd->add_option("--lut", lut, "identity, negate, square or double");
  pbs_cmd->add_option("--message-bits", message_bits, "Message bits");
  pbs_cmd->get_option("--out")->required();

  auto* gate_cmd = app.add_subcommand("gate", "Bootstrapped Boolean gate");
  add_common(gate_cmd, cfg);
  gate_cmd->add_option("--op", op, "nand, and, or or xor");
  gate_cmd->add_option("--bk", bk_path, "Bootstrapping key file")->required();
  gate_cmd->add_option("--in1", in_path, "First input ciphertext")->required();
  gate_cmd->add_option("--in2", in2_path, "Second input ciphertext")->required();
  gate_cmd->get_option("--out")->required();

  // sweep
  std::string knob = "all", metric = "coefficient", budget_kind = "inherent", from_csv, summary_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Fractional-bit sweep of the BK, FFT and IFFT formats");
  add_common(sweep_cmd, cfg);
  sweep_cmd->add_option("--trials", cfg.trials, "Trials per sweep point");
  sweep_cmd->add_option("--jobs", cfg.jobs, "Worker threads");
  sweep_cmd->add_option("--knob", knob, "all, bk, fft or ifft");
  sweep_cmd->add_option("--metric", metric, "coefficient or phase");
  sweep_cmd->add_option("--budget", budget_kind, "inherent or tail");
  sweep_cmd->add_option("--from-csv", from_csv, "Re-select from an existing sweep CSV");
  sweep_cmd->add_option("--summary", summary_path, "Selection JSON path (default stdout)");

  // select-msb
  double sigma = 0.0;
  std::string target = "2^-64", tap;
  auto* msb_cmd = app.add_subcommand("select-msb", "MSB position from a standard deviation or a measured tap");
  add_common(msb_cmd, cfg);
  msb_cmd->add_option("--sigma", sigma, "Standard deviation");
  msb_cmd->add_option("--tap", tap, "Measure this datapath tap over random bootstraps");
  msb_cmd->add_option("--target", target, "Overflow probability, e.g. 2^-64");
  msb_cmd->add_option("--trials", cfg.trials, "Bootstraps when measuring a tap");

  // perf
  std::string perf_config, style, perf_format = "json";
  auto* perf_cmd = app.add_subcommand("perf", "Analytic pipeline performance report");
  perf_cmd->add_option("--param-set", cfg.param_set, "I or II");
  perf_cmd->add_option("--config", perf_config, "JSON file overriding pipeline fields");
  perf_cmd->add_option("--style", style, "fft-unrolled or dotproduct-unrolled");
  perf_cmd->add_option("--format", perf_format, "json or csv");
  perf_cmd->add_option("--out", cfg.out, "Output path");

  try {
    std::vector<const char*> argv{"fxtfhe"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (!app.get_subcommands().empty()) msg += " (see '" + app.get_subcommands().front()->get_name() + " --help')";
    return error_json(err, kExitUsage, "usage", msg);
  }

  try {
    if (*keygen_cmd) {
      const Resolved r = resolve(cfg);
      const SecretKeys keys = keygen(r.params, cfg.seed);
      const BootstrappingKey bk = BootstrappingKey::generate(keys, r.params, r.plans(), cfg.seed);
      const std::string sk_path = (std::filesystem::path(cfg.out) / "secret.key").string();
      const std::string bkp = (std::filesystem::path(cfg.out) / "bootstrap.key").string();
      {
        auto f = open_out(sk_path);
        write_secret_keys(f, keys, r.params);
      }
      {
        auto f = open_out(bkp);
        write_bootstrapping_key(f, bk);
      }
      ordered_json j;
      j["params"] = params_json(r.params);
      j["fft_mode"] = r.fixed ? "fixed" : "reference";
      j["bk_format"] = bk.is_fixed() ? ordered_json(bk.format()->to_string()) : ordered_json(nullptr);
      j["secret_key"] = sk_path;
      j["bootstrap_key"] = bkp;
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*encrypt_cmd || *decrypt_cmd) {
      auto [keys, params] = load_keys(key_path);
      if (encoding != "bool" && encoding != "int") throw std::invalid_argument("--encoding must be bool or int");
      if (encoding == "int" && (message_bits < 1 || message_bits > 8)) {
        throw std::invalid_argument("--message-bits must be in [1, 8]");
      }
      if (*encrypt_cmd) {
        if (encoding == "bool" && message > 1) throw std::invalid_argument("bool message must be 0 or 1");
        if (encoding == "int" && message >= (1U << message_bits)) throw std::invalid_argument("message out of range");
        const Torus32 mu = encoding == "bool" ? encode_bool(message != 0) : encode_message(message, message_bits);
        Prng prng = Prng::stream(cfg.seed, "encrypt");
        save_ct(cfg.out, tlwe_encrypt(mu, keys.tlwe_key, params.sigma_tlwe, prng), params);
        ordered_json j{{"out", cfg.out}, {"encoding", encoding}, {"message", message}};
        out << j.dump() << '\n';
        return kExitOk;
      }
      auto in = open_in(in_path);
      const FileHeader h = read_header(in);
      in.seekg(0);
      if (h.kind != ObjectKind::kTlweCiphertext) throw SerializationError("'" + in_path + "' is not a TLWE ciphertext");
      const TlweCiphertext ct = read_tlwe(in, params);
      // Bootstrapped outputs are keyed by the extracted key.
      const auto& key = ct.dim() == keys.tlwe_key.size() ? keys.tlwe_key : keys.extracted_key;
      if (ct.dim() != key.size()) throw std::invalid_argument("ciphertext dimension matches no key");
      const Torus32 phase = tlwe_decrypt(ct, key);
      ordered_json j;
      j["phase"] = torus_to_double(phase);
      j["encoding"] = encoding;
      j["message"] = encoding == "bool" ? static_cast<std::uint32_t>(decode_bool(phase))
                                        : decode_message(phase, message_bits);
      j["key"] = ct.dim() == keys.tlwe_key.size() ? "tlwe" : "extracted";
      emit(j.dump() + "\n", cfg.out, out);
      return kExitOk;
    }

    if (*pbs_cmd || *gate_cmd) {
      const BootstrappingKey bk = load_bk(bk_path);
      const TfheParams& params = bk.params();
      const TransformPlans plans = plans_for(bk, cfg);
      OverflowPolicy policy;
      TlweCiphertext result;
      if (*pbs_cmd) {
        if (message_bits < 1 || message_bits > 8) throw std::invalid_argument("--message-bits must be in [1, 8]");
        const TlweCiphertext ct = load_ct(in_path, params);
        result = programmable_bootstrap(ct, named_lut(lut, params.N, message_bits), bk, plans, policy);
      } else {
        const BoolGate g = parse_bool_gate(op);
        result = gate(g, load_ct(in_path, params), load_ct(in2_path, params), bk, plans, policy);
      }
      save_ct(cfg.out, result, params);
      ordered_json j{{"out", cfg.out}, {"overflow_count", policy.count()}};
      out << j.dump() << '\n';
      return kExitOk;
    }

    if (*sweep_cmd) {
      const Resolved r = resolve(cfg);
      const NoiseMetric m = parse_noise_metric(metric);
      NoiseBudget budget;
      if (budget_kind == "inherent") {
        budget = inherent_budget(r.params);
      } else if (budget_kind == "tail") {
        budget = total_budget(r.params);
      } else {
        throw std::invalid_argument("--budget must be inherent or tail");
      }
      std::vector<SweepPoint> points;
      if (!from_csv.empty()) {
        auto in = open_in(from_csv);
        points = read_sweep_csv(in);
      } else {
        SweepOptions opts;
        opts.metric = m;
        opts.experiment.jobs = cfg.jobs;
        std::vector<SweepResult> results;
        if (knob == "all") {
          results = sweep_all(r.params, budget, cfg.trials, cfg.seed, opts);
        } else {
          const Knob k = parse_knob(knob);
          results.push_back(sweep_lsb(r.params, k, default_range(r.params, k, opts), budget, cfg.trials, cfg.seed, opts));
        }
        for (const auto& res : results) points.insert(points.end(), res.points.begin(), res.points.end());
        std::ostringstream csv;
        write_sweep_csv(csv, points);
        emit(csv.str(), cfg.out, out);
      }
      const std::string summary = selection_json(r.params, m, budget.per_source_budget(), points) + "\n";
      // With the CSV on stdout the summary needs its own --summary path.
      if (!summary_path.empty() || !from_csv.empty() || !cfg.out.empty()) emit(summary, summary_path, out);
      return kExitOk;
    }

    if (*msb_cmd) {
      const double p = parse_probability(target);
      ordered_json j;
      double s = sigma;
      if (!tap.empty()) {
        const Resolved r = resolve(cfg);
        auto workload = make_bootstrap_workload(r.params, r.plans(), cfg.seed);
        const VarianceReport rep = measure_variance(tap, *workload, cfg.trials, cfg.seed);
        s = std::sqrt(rep.variance);
        j["tap"] = tap;
        j["variance"] = rep.variance;
        j["ci"] = {rep.ci_low, rep.ci_high};
        j["samples"] = rep.count;
      } else if (!(sigma > 0.0)) {
        throw std::invalid_argument("pass --sigma > 0 or --tap");
      }
      const int msb = select_msb(s, p);
      j["sigma"] = s;
      j["target"] = p;
      j["p_msb"] = msb;
      j["log2_overflow_probability"] = log2_overflow_probability(s, msb);
      emit(j.dump(2) + "\n", cfg.out, out);
      return kExitOk;
    }

    if (*perf_cmd) {
      PipelineConfig pc = PipelineConfig::preset(cfg.param_set);
      if (!perf_config.empty()) pc = pipeline_config_from_json(read_text(perf_config), pc);
      if (!style.empty()) {
        pc.style = parse_unroll_style(style);
        if (pc.style == UnrollStyle::kDotproductUnrolled) pc = PipelineConfig::dotproduct_iso(pc);
      }
      const PipelineReport rep = evaluate(pc);
      if (perf_format == "json") {
        emit(to_json(rep, pc) + "\n", cfg.out, out);
      } else if (perf_format == "csv") {
        emit(to_csv(rep, pc), cfg.out, out);
      } else {
        throw std::invalid_argument("--format must be json or csv");
      }
      return kExitOk;
    }
  } catch (const FileError& e) {
    return error_json(err, kExitFile, "file", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return error_json(err, kExitFile, "file", e.what());
  } catch (const SerializationError& e) {
    return error_json(err, kExitFile, "format", e.what());
  } catch (const std::invalid_argument& e) {
    return error_json(err, kExitParameter, "parameter", e.what());
  } catch (const std::out_of_range& e) {
    return error_json(err, kExitParameter, "parameter", e.what());
  } catch (const std::exception& e) {
    return error_json(err, kExitRuntime, "runtime", e.what());
  }
  return error_json(err, kExitUsage, "usage", "no verb given");
}

}  // namespace fxtfhe::cli

#include "fxtfhe/serialization.hpp"

#include <bit>
#include <istream>
#include <json.hpp>
#include <ostream>

namespace fxtfhe {

namespace {

class WordWriter {
 public:
  explicit WordWriter(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(b, 4);
  }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::ostream& out_;
};

class WordReader {
 public:
  explicit WordReader(std::istream& in) : in_(in) {}

  std::uint32_t u32() {
    unsigned char b[4];
    in_.read(reinterpret_cast<char*>(b), 4);
    if (in_.gcount() != 4) throw SerializationError("unexpected end of file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32();
    std::uint64_t hi = u32();
    return lo | (hi << 32);
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  std::istream& in_;
};

void write_header(std::ostream& out, ObjectKind kind, std::uint64_t hash) {
  WordWriter w(out);
  w.u32(static_cast<std::uint32_t>(kind));
  w.u32(kFormatVersion);
  w.u64(hash);
}

FileHeader expect_header(std::istream& in, ObjectKind kind) {
  FileHeader h = read_header(in);
  if (h.kind != kind) throw SerializationError("file holds a different object kind");
  return h;
}

void write_params(WordWriter& w, const TfheParams& p) {
  w.i32(p.n);
  w.i32(p.k);
  w.i32(p.N);
  w.i32(p.beta);
  w.i32(p.l);
  w.f64(p.sigma_tlwe);
  w.f64(p.sigma_tglwe);
  w.u32(static_cast<std::uint32_t>(p.name.size()));
  for (char c : p.name) w.u32(static_cast<unsigned char>(c));
}

TfheParams read_params(WordReader& r) {
  TfheParams p;
  p.n = r.i32();
  p.k = r.i32();
  p.N = r.i32();
  p.beta = r.i32();
  p.l = r.i32();
  p.sigma_tlwe = r.f64();
  p.sigma_tglwe = r.f64();
  std::uint32_t len = r.u32();
  if (len > 64) throw SerializationError("parameter name too long");
  p.name.clear();
  for (std::uint32_t i = 0; i < len; ++i) p.name.push_back(static_cast<char>(r.u32()));
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw SerializationError(std::string("invalid embedded parameters: ") + e.what());
  }
  return p;
}

void write_bits(WordWriter& w, const std::vector<std::uint8_t>& bits) {
  w.u32(static_cast<std::uint32_t>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); i += 32) {
    std::uint32_t word = 0;
    for (std::size_t j = 0; j < 32 && i + j < bits.size(); ++j) word |= static_cast<std::uint32_t>(bits[i + j] & 1) << j;
    w.u32(word);
  }
}

std::vector<std::uint8_t> read_bits(WordReader& r, std::size_t expected) {
  std::uint32_t n = r.u32();
  if (n != expected) throw SerializationError("key length does not match parameters");
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; i += 32) {
    std::uint32_t word = r.u32();
    for (std::size_t j = 0; j < 32 && i + j < n; ++j) bits[i + j] = static_cast<std::uint8_t>((word >> j) & 1);
  }
  return bits;
}

void check_hash(const FileHeader& h, const TfheParams& params) {
  if (h.params_hash != params.hash()) throw SerializationError("file was written under different parameters");
}

void write_poly(WordWriter& w, const TorusPolynomial& p) {
  for (Torus32 v : p) w.u32(v);
}

TorusPolynomial read_poly(WordReader& r, std::size_t degree) {
  TorusPolynomial p(degree);
  for (auto& v : p) v = r.u32();
  return p;
}

}  // namespace

FileHeader read_header(std::istream& in) {
  WordReader r(in);
  FileHeader h;
  h.kind = static_cast<ObjectKind>(r.u32());
  h.version = r.u32();
  h.params_hash = r.u64();
  switch (h.kind) {
    case ObjectKind::kSecretKeys:
    case ObjectKind::kTlweCiphertext:
    case ObjectKind::kTglweCiphertext:
    case ObjectKind::kBootstrappingKey:
      break;
    default:
      throw SerializationError("bad magic number");
  }
  if (h.version != kFormatVersion) throw SerializationError("unsupported format version");
  return h;
}

void write_secret_keys(std::ostream& out, const SecretKeys& keys, const TfheParams& params) {
  write_header(out, ObjectKind::kSecretKeys, params.hash());
  WordWriter w(out);
  write_params(w, params);
  write_bits(w, keys.tlwe_key);
  for (const auto& poly : keys.tglwe_key) write_bits(w, poly);
}

std::pair<SecretKeys, TfheParams> read_secret_keys(std::istream& in) {
  FileHeader h = expect_header(in, ObjectKind::kSecretKeys);
  WordReader r(in);
  TfheParams params = read_params(r);
  check_hash(h, params);
  auto tlwe = read_bits(r, static_cast<std::size_t>(params.n));
  std::vector<std::vector<std::uint8_t>> tglwe;
  for (int p = 0; p < params.k; ++p) tglwe.push_back(read_bits(r, static_cast<std::size_t>(params.N)));
  return {make_keys(std::move(tlwe), std::move(tglwe)), params};
}

void write_tlwe(std::ostream& out, const TlweCiphertext& ct, const TfheParams& params) {
  write_header(out, ObjectKind::kTlweCiphertext, params.hash());
  WordWriter w(out);
  w.u32(static_cast<std::uint32_t>(ct.dim()));
  for (Torus32 v : ct.a) w.u32(v);
  w.u32(ct.b);
}

TlweCiphertext read_tlwe(std::istream& in, const TfheParams& params) {
  FileHeader h = expect_header(in, ObjectKind::kTlweCiphertext);
  check_hash(h, params);
  WordReader r(in);
  std::uint32_t dim = r.u32();
  if (dim != static_cast<std::uint32_t>(params.n) && dim != static_cast<std::uint32_t>(params.k * params.N)) {
    throw SerializationError("ciphertext dimension does not match parameters");
  }
  TlweCiphertext ct;
  ct.a.resize(dim);
  for (auto& v : ct.a) v = r.u32();
  ct.b = r.u32();
  return ct;
}

void write_tglwe(std::ostream& out, const TglweCiphertext& ct, const TfheParams& params) {
  write_header(out, ObjectKind::kTglweCiphertext, params.hash());
  WordWriter w(out);
  w.u32(static_cast<std::uint32_t>(ct.k()));
  w.u32(static_cast<std::uint32_t>(ct.degree()));
  for (const auto& p : ct.a) write_poly(w, p);
  write_poly(w, ct.b);
}

TglweCiphertext read_tglwe(std::istream& in, const TfheParams& params) {
  FileHeader h = expect_header(in, ObjectKind::kTglweCiphertext);
  check_hash(h, params);
  WordReader r(in);
  std::uint32_t k = r.u32();
  std::uint32_t degree = r.u32();
  if (k != static_cast<std::uint32_t>(params.k) || degree != static_cast<std::uint32_t>(params.N)) {
    throw SerializationError("ciphertext shape does not match parameters");
  }
  TglweCiphertext ct;
  for (std::uint32_t p = 0; p < k; ++p) ct.a.push_back(read_poly(r, degree));
  ct.b = read_poly(r, degree);
  return ct;
}

void write_bootstrapping_key(std::ostream& out, const BootstrappingKey& bk) {
  write_header(out, ObjectKind::kBootstrappingKey, bk.params().hash());
  WordWriter w(out);
  write_params(w, bk.params());
  const bool fixed = bk.is_fixed();
  w.u32(fixed ? 1 : 0);
  FixedPointFormat fmt = fixed ? *bk.format() : FixedPointFormat{64, 0, 0};
  w.i32(fmt.width);
  w.i32(fmt.integer_bits);
  w.i32(fmt.fractional_bits);
  w.u32(static_cast<std::uint32_t>(bk.size()));
  const bool wide = fmt.width > 32;
  for (const auto& entry : bk.entries()) {
    for (const auto& poly : entry.polys) {
      for (std::size_t i = 0; i < poly.size(); ++i) {
        if (!fixed) {
          w.f64(poly.values()[i].real());
          w.f64(poly.values()[i].imag());
        } else if (wide) {
          w.u64(static_cast<std::uint64_t>(poly.re()[i]));
          w.u64(static_cast<std::uint64_t>(poly.im()[i]));
        } else {
          w.i32(static_cast<std::int32_t>(poly.re()[i]));
          w.i32(static_cast<std::int32_t>(poly.im()[i]));
        }
      }
    }
  }
}

BootstrappingKey read_bootstrapping_key(std::istream& in) {
  FileHeader h = expect_header(in, ObjectKind::kBootstrappingKey);
  WordReader r(in);
  TfheParams params = read_params(r);
  check_hash(h, params);
  const bool fixed = r.u32() != 0;
  FixedPointFormat fmt{r.i32(), r.i32(), r.i32()};
  std::optional<FixedPointFormat> format;
  if (fixed) {
    try {
      fmt.validate();
    } catch (const std::invalid_argument& e) {
      throw SerializationError(e.what());
    }
    format = fmt;
  }
  const std::uint32_t count = r.u32();
  if (count != static_cast<std::uint32_t>(params.n)) throw SerializationError("entry count does not match n");
  const std::size_t m = static_cast<std::size_t>(params.N / 2);
  const std::size_t cols = static_cast<std::size_t>(params.k + 1);
  const std::size_t rows = cols * static_cast<std::size_t>(params.l);
  const bool wide = fmt.width > 32;
  std::vector<BkEntry> entries(count);
  for (auto& entry : entries) {
    entry.columns = cols;
    entry.polys.reserve(rows * cols);
    for (std::size_t p = 0; p < rows * cols; ++p) {
      if (!fixed) {
        std::vector<cplx> v(m);
        for (auto& c : v) {
          double re = r.f64();
          double im = r.f64();
          c = cplx(re, im);
        }
        entry.polys.push_back(FftDomainPoly::reference(std::move(v)));
      } else {
        std::vector<std::int64_t> re(m);
        std::vector<std::int64_t> im(m);
        for (std::size_t i = 0; i < m; ++i) {
          re[i] = wide ? static_cast<std::int64_t>(r.u64()) : r.i32();
          im[i] = wide ? static_cast<std::int64_t>(r.u64()) : r.i32();
        }
        entry.polys.push_back(FftDomainPoly::fixed(std::move(re), std::move(im), fmt));
      }
    }
  }
  return BootstrappingKey(params, std::move(entries), format);
}

std::string to_json(const SecretKeys& keys, const TfheParams& params) {
  nlohmann::json j;
  j["params"] = {{"name", params.name}, {"n", params.n},       {"k", params.k},
                 {"N", params.N},       {"beta", params.beta}, {"l", params.l},
                 {"sigma_tlwe", params.sigma_tlwe}, {"sigma_tglwe", params.sigma_tglwe}};
  j["tlwe_key"] = keys.tlwe_key;
  j["tglwe_key"] = keys.tglwe_key;
  return j.dump(2);
}

std::string to_json(const TlweCiphertext& ct) {
  nlohmann::json j;
  j["dim"] = ct.dim();
  j["a"] = ct.a;
  j["b"] = ct.b;
  return j.dump(2);
}

std::string to_json(const TglweCiphertext& ct) {
  nlohmann::json j;
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : ct.a) a.push_back(p.coeffs());
  j["k"] = ct.k();
  j["N"] = ct.degree();
  j["a"] = a;
  j["b"] = ct.b.coeffs();
  return j.dump(2);
}

}  // namespace fxtfhe

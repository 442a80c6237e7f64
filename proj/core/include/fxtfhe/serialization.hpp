#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/ciphertext.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/params.hpp"

namespace fxtfhe {

// Files start with a 16-byte header: magic (4 bytes naming the object kind),
// format version (u32), parameter hash (u64). The payload is a sequence of
// little-endian 32-bit words.
enum class ObjectKind : std::uint32_t {
  kSecretKeys = 0x4B535846,        // "FXSK"
  kTlweCiphertext = 0x4C545846,    // "FXTL"
  kTglweCiphertext = 0x47545846,   // "FXTG"
  kBootstrappingKey = 0x4B425846,  // "FXBK"
};

inline constexpr std::uint32_t kFormatVersion = 1;

class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FileHeader {
  ObjectKind kind{};
  std::uint32_t version = kFormatVersion;
  std::uint64_t params_hash = 0;
};

FileHeader read_header(std::istream& in);

void write_secret_keys(std::ostream& out, const SecretKeys& keys, const TfheParams& params);
// Returns the keys and the embedded parameters.
std::pair<SecretKeys, TfheParams> read_secret_keys(std::istream& in);

void write_tlwe(std::ostream& out, const TlweCiphertext& ct, const TfheParams& params);
// Throws if the file was produced under different parameters.
TlweCiphertext read_tlwe(std::istream& in, const TfheParams& params);

void write_tglwe(std::ostream& out, const TglweCiphertext& ct, const TfheParams& params);
TglweCiphertext read_tglwe(std::istream& in, const TfheParams& params);

void write_bootstrapping_key(std::ostream& out, const BootstrappingKey& bk);
BootstrappingKey read_bootstrapping_key(std::istream& in);

std::string to_json(const SecretKeys& keys, const TfheParams& params);
std::string to_json(const TlweCiphertext& ct);
std::string to_json(const TglweCiphertext& ct);

}  // namespace fxtfhe

#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/ciphertext.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/serialization.hpp"
#include "oracles.hpp"

namespace fxtfhe {
namespace {

std::uint32_t word_at(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  return v;
}

TEST(Serialization, SecretKeysRoundTripAndHeader) {
  auto params = TfheParams::set_i();
  auto keys = keygen(params, 3);
  std::stringstream ss;
  write_secret_keys(ss, keys, params);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "FXSK");
  EXPECT_EQ(word_at(bytes, 4), kFormatVersion);
  const std::uint64_t hash = word_at(bytes, 8) | (static_cast<std::uint64_t>(word_at(bytes, 12)) << 32);
  EXPECT_EQ(hash, params.hash());
  auto [back, p] = read_secret_keys(ss);
  EXPECT_EQ(back, keys);
  EXPECT_EQ(p.hash(), params.hash());
  EXPECT_EQ(p.n, 586);
}

TEST(Serialization, TlweRoundTripAndParamCheck) {
  auto params = TfheParams::set_ii();
  Prng prng(1);
  TlweCiphertext ct;
  for (int i = 0; i < params.n; ++i) ct.a.push_back(prng.next_u32());
  ct.b = prng.next_u32();
  std::stringstream ss;
  write_tlwe(ss, ct, params);
  EXPECT_EQ(ss.str().size(), 16u + 4u * (1 + 500 + 1));
  std::stringstream copy(ss.str());
  EXPECT_EQ(read_tlwe(ss, params), ct);
  EXPECT_THROW(read_tlwe(copy, TfheParams::set_i()), SerializationError);
}

TEST(Serialization, TglweRoundTrip) {
  auto params = oracle::tiny_params();
  Prng prng(2);
  TglweCiphertext ct;
  ct.a.push_back(uniform_torus_polynomial(prng, 256));
  ct.b = uniform_torus_polynomial(prng, 256);
  std::stringstream ss;
  write_tglwe(ss, ct, params);
  EXPECT_EQ(read_tglwe(ss, params), ct);
}

TEST(Serialization, BootstrappingKeyRoundTrip) {
  auto params = oracle::tiny_params();
  auto keys = keygen(params, 4);
  for (bool fixed : {false, true}) {
    auto plans = fixed ? TransformPlans::fixed(256, DatapathFormats::table3(TfheParams::set_i()))
                       : TransformPlans::reference(256);
    auto bk = BootstrappingKey::generate(keys, params, plans, 5);
    std::stringstream ss;
    write_bootstrapping_key(ss, bk);
    auto back = read_bootstrapping_key(ss);
    EXPECT_EQ(back.is_fixed(), fixed);
    ASSERT_EQ(back.size(), bk.size());
    EXPECT_EQ(back.params().hash(), params.hash());
    for (std::size_t i = 0; i < bk.size(); ++i) {
      const auto& a = bk.entry(i);
      const auto& b = back.entry(i);
      ASSERT_EQ(a.polys.size(), b.polys.size());
      for (std::size_t j = 0; j < a.polys.size(); ++j) {
        if (fixed) {
          ASSERT_EQ(a.polys[j].re(), b.polys[j].re());
          ASSERT_EQ(a.polys[j].im(), b.polys[j].im());
          ASSERT_EQ(a.polys[j].format(), b.polys[j].format());
        } else {
          ASSERT_EQ(a.polys[j].values(), b.polys[j].values());
        }
      }
    }
  }
}

TEST(Serialization, RejectsWrongKindAndCorruption) {
  auto params = TfheParams::set_i();
  std::stringstream ss;
  write_tlwe(ss, tlwe_trivial(1, 586), params);
  std::stringstream wrong(ss.str());
  EXPECT_THROW(read_secret_keys(wrong), SerializationError);
  std::stringstream truncated(ss.str().substr(0, 30));
  EXPECT_THROW(read_tlwe(truncated, params), SerializationError);
  std::string bad = ss.str();
  bad[0] = 'Z';
  std::stringstream bad_magic(bad);
  EXPECT_THROW(read_header(bad_magic), SerializationError);
  std::string bad_version = ss.str();
  bad_version[4] = 9;
  std::stringstream bv(bad_version);
  EXPECT_THROW(read_header(bv), SerializationError);
}

TEST(Serialization, JsonExport) {
  auto params = oracle::tiny_params();
  auto keys = keygen(params, 6);
  auto j = nlohmann::json::parse(to_json(keys, params));
  EXPECT_EQ(j["params"]["n"], 16);
  EXPECT_EQ(j["tlwe_key"].size(), 16u);
  auto t = nlohmann::json::parse(to_json(tlwe_trivial(7, 3)));
  EXPECT_EQ(t["dim"], 3);
  EXPECT_EQ(t["b"], 7);
  auto g = nlohmann::json::parse(to_json(TglweCiphertext::zero(1, 4)));
  EXPECT_EQ(g["N"], 4);
  EXPECT_EQ(g["a"].size(), 1u);
}

}  // namespace
}  // namespace fxtfhe

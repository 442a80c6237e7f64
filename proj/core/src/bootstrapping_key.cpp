#include "fxtfhe/bootstrapping_key.hpp"

#include <stdexcept>

namespace fxtfhe {

BootstrappingKey::BootstrappingKey(TfheParams params, std::vector<BkEntry> entries,
                                   std::optional<FixedPointFormat> format)
    : params_(std::move(params)), entries_(std::move(entries)), format_(format) {}

std::vector<TggswCiphertext> BootstrappingKey::encrypt_tggsw(const SecretKeys& keys, const TfheParams& params,
                                                             std::uint64_t seed) {
  params.validate();
  if (keys.n() != params.n || keys.k() != params.k || keys.N() != params.N) {
    throw std::invalid_argument("keys do not match parameters");
  }
  Prng prng = Prng::stream(seed, "bootstrapping-key");
  std::vector<TggswCiphertext> out;
  out.reserve(static_cast<std::size_t>(params.n));
  for (int i = 0; i < params.n; ++i) {
    out.push_back(tggsw_encrypt(keys.tlwe_key[static_cast<std::size_t>(i)], keys.tglwe_key, params.sigma_tglwe,
                                params.beta, params.l, prng));
  }
  return out;
}

BkEntry BootstrappingKey::convert_entry(const TggswCiphertext& g, const TransformPlans& plans,
                                        OverflowPolicy& policy) {
  BkEntry e;
  e.columns = g.rows.empty() ? 0 : g.rows[0].k() + 1;
  e.polys.reserve(g.rows.size() * e.columns);
  for (const auto& row : g.rows) {
    for (std::size_t c = 0; c < e.columns; ++c) e.polys.push_back(plans.convert_bk(row.component(c), policy));
  }
  return e;
}

BkEntry BootstrappingKey::quantize_entry(const BkEntry& reference, const TransformPlans& plans,
                                         OverflowPolicy& policy) {
  BkEntry e;
  e.columns = reference.columns;
  e.polys.reserve(reference.polys.size());
  for (const auto& p : reference.polys) e.polys.push_back(plans.quantize_bk(p, policy));
  return e;
}

BootstrappingKey BootstrappingKey::from_tggsw(const std::vector<TggswCiphertext>& tggsw, const TfheParams& params,
                                              const TransformPlans& plans, OverflowPolicy& policy) {
  std::vector<BkEntry> entries;
  entries.reserve(tggsw.size());
  for (const auto& g : tggsw) entries.push_back(convert_entry(g, plans, policy));
  return BootstrappingKey(params, std::move(entries), plans.bk_format);
}

BootstrappingKey BootstrappingKey::generate(const SecretKeys& keys, const TfheParams& params,
                                            const TransformPlans& plans, std::uint64_t seed) {
  OverflowPolicy policy;
  auto key = from_tggsw(encrypt_tggsw(keys, params, seed), params, plans, policy);
  if (policy.count() != 0) throw FixedPointOverflow("bootstrapping key does not fit the BK format");
  return key;
}

BootstrappingKey BootstrappingKey::quantized(const TransformPlans& plans, OverflowPolicy& policy) const {
  if (is_fixed()) throw std::invalid_argument("key is already quantized");
  std::vector<BkEntry> entries;
  entries.reserve(entries_.size());
  for (const auto& e : entries_) entries.push_back(quantize_entry(e, plans, policy));
  return BootstrappingKey(params_, std::move(entries), plans.bk_format);
}

double BootstrappingKey::entry_bytes() const {
  const double words = static_cast<double>((params_.k + 1) * params_.l) * (params_.k + 1) * (params_.N / 2) * 2.0;
  const int width = format_ ? format_->width : 64;
  return words * width / 8.0;
}

}  // namespace fxtfhe

#include "properties.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/fixed_point.hpp"
#include "fxtfhe/gadget.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/pbs.hpp"
#include "oracles.hpp"

namespace fxtfhe::props {

namespace {

void fail(PropertyResult& r, const std::string& what) {
  if (r.failures++ == 0) r.first_failure = what;
}

}  // namespace

PropertyResult decomposition_bound(long cases, std::uint64_t seed) {
  PropertyResult r{"decomposition bound", 0, 0, {}};
  Prng prng(seed);
  const std::pair<int, int> gadgets[] = {{8, 2}, {10, 2}, {7, 3}, {4, 4}, {16, 2}, {3, 5}, {1, 1}};
  const TieRule ties[] = {TieRule::kHalfUp, TieRule::kHalfEven};
  for (long c = 0; c < cases; ++c) {
    const auto [beta, l] = gadgets[static_cast<std::size_t>(c) % std::size(gadgets)];
    const GadgetParams g{beta, l, ties[(c / 7) % 2]};
    const int s = 32 - beta * l;
    Torus32 a = prng.next_u32();
    if (c % 3 == 1 && s > 0) {
      // Near a multiple of the rounding step or near a tie.
      const Torus32 base = a & ~((Torus32{1} << s) - 1);
      const std::int32_t offsets[] = {-1, 0, 1};
      const Torus32 half = s > 0 ? Torus32{1} << (s - 1) : 0;
      a = base + (prng.next_bit() ? half : 0) + static_cast<Torus32>(offsets[prng.uniform_below(3)]);
    }
    auto digits = gadget_decompose(a, g);
    const std::int32_t lo = -(1 << (beta - 1));
    const std::int32_t hi = 1 << (beta - 1);
    bool digits_ok = digits.size() == static_cast<std::size_t>(l);
    for (auto d : digits) digits_ok = digits_ok && d >= lo && d < hi;
    const Torus32 back = gadget_recompose(digits, beta);
    const std::uint64_t err = torus_abs(back - a);
    const std::uint64_t bound = s > 0 ? std::uint64_t{1} << (s - 1) : 0;
    ++r.cases;
    if (!digits_ok || err > bound) {
      std::ostringstream os;
      os << "a=" << a << " beta=" << beta << " l=" << l << " err=" << err;
      fail(r, os.str());
    }
  }
  return r;
}

PropertyResult cmux_select(long cases, std::uint64_t seed) {
  PropertyResult r{"CMUX select-left/right", 0, 0, {}};
  const auto params = oracle::tiny_params(0.0, 0.0);
  const auto keys = keygen(params, seed);
  const auto plans = TransformPlans::reference(params.N);
  const GadgetParams g{params.beta, params.l, TieRule::kHalfUp};
  Prng prng(seed + 1);
  OverflowPolicy policy;
  std::vector<BkEntry> entries[2];
  for (int m = 0; m < 2; ++m) {
    for (int e = 0; e < 8; ++e) {
      entries[m].push_back(BootstrappingKey::convert_entry(
          tggsw_encrypt(m, keys.tglwe_key, 0.0, params.beta, params.l, prng), plans, policy));
    }
  }
  std::uint64_t ones = 0;
  for (const auto& poly : keys.tglwe_key) {
    for (auto bit : poly) ones += bit;
  }
  const std::uint64_t bound = (std::uint64_t{1} << (32 - params.beta * params.l - 1)) * (1 + ones);
  const auto N = static_cast<std::size_t>(params.N);
  for (long c = 0; c < cases; ++c) {
    const int m = static_cast<int>(c % 2);
    const auto& entry = entries[m][prng.uniform_below(8)];
    const Torus32 a_i = prng.next_u32();
    auto acc = tglwe_encrypt(uniform_torus_polynomial(prng, N), keys.tglwe_key, 0.0, prng);
    const auto before = tglwe_decrypt(acc, keys.tglwe_key);
    const auto out = tglwe_decrypt(cmux(acc, entry, a_i, plans, g, policy), keys.tglwe_key);
    const auto expect = m == 1 ? mul_by_monomial(before, rotation_amount(a_i, params.N)) : before;
    std::uint64_t worst = 0;
    for (std::size_t i = 0; i < N; ++i) worst = std::max<std::uint64_t>(worst, torus_abs(out[i] - expect[i]));
    ++r.cases;
    if (worst > bound) fail(r, "m=" + std::to_string(m) + " a_i=" + std::to_string(a_i) + " err=" + std::to_string(worst));
  }
  if (policy.count() != 0) fail(r, "overflow on the reference path");
  return r;
}

PropertyResult monomial_identity(long cases, std::uint64_t seed) {
  PropertyResult r{"monomial r + (2N-r) identity", 0, 0, {}};
  Prng prng(seed);
  const std::size_t sizes[] = {8, 64, 512, 1024};
  for (long c = 0; c < cases; ++c) {
    const std::size_t N = sizes[static_cast<std::size_t>(c) % std::size(sizes)];
    const std::size_t rot = prng.uniform_below(2 * N);
    const std::size_t back = (2 * N - rot) % (2 * N);
    const auto p = uniform_torus_polynomial(prng, N);
    TglweCiphertext ct;
    ct.a.push_back(uniform_torus_polynomial(prng, N));
    ct.b = p;
    ++r.cases;
    if (mul_by_monomial(mul_by_monomial(p, rot), back) != p || monomial_mul(monomial_mul(ct, rot), back) != ct) {
      fail(r, "N=" + std::to_string(N) + " r=" + std::to_string(rot));
    }
  }
  return r;
}

PropertyResult batch_vs_sequential(long cases, std::uint64_t seed) {
  PropertyResult r{"batch vs sequential bit-equality", 0, 0, {}};
  const auto params = oracle::tiny_params();
  const auto plans = TransformPlans::fixed(params.N, DatapathFormats::table3(TfheParams::set_i()));
  const auto keys = keygen(params, seed);
  const auto bk = BootstrappingKey::generate(keys, params, plans, seed + 1);
  Prng prng(seed + 2);
  LutTable luts;
  luts.add(identity_lut(params.N, 2));
  luts.add(constant_lut(Torus32{1} << 29, params.N));
  luts.add(build_lut([](std::uint32_t m) { return encode_message((3 * m + 1) % 4, 2); }, params.N, 2));
  while (r.cases < cases) {
    const long b = std::min<long>(cases - r.cases, 1 + static_cast<long>(prng.uniform_below(20)));
    PbsBatch batch;
    for (long c = 0; c < b; ++c) {
      batch.inputs.push_back(tlwe_encrypt(prng.next_u32(), keys.tlwe_key, params.sigma_tlwe, prng));
      batch.lut_index.push_back(prng.uniform_below(luts.size()));
    }
    BootstrapReport report;
    const auto out = bootstrap(batch, bk, luts, plans, &report);
    std::uint64_t overflows = 0;
    for (long c = 0; c < b; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      OverflowPolicy policy;
      const auto single = programmable_bootstrap(batch.inputs[idx], luts.at(batch.lut_index[idx]), bk, plans, policy);
      overflows += policy.count();
      ++r.cases;
      if (single != out[idx]) fail(r, "batch of " + std::to_string(b) + ", position " + std::to_string(c));
    }
    if (overflows != report.overflow_count) fail(r, "overflow counts differ in a batch of " + std::to_string(b));
    for (auto reads : report.entry_reads) {
      if (reads != 1) {
        fail(r, "BK entry read " + std::to_string(reads) + " times in one batch");
        break;
      }
    }
  }
  return r;
}

PropertyResult quantize_idempotence(long cases, std::uint64_t seed) {
  PropertyResult r{"quantize idempotence", 0, 0, {}};
  Prng prng(seed);
  const RoundingMode modes[] = {RoundingMode::kTruncate, RoundingMode::kHalfUp, RoundingMode::kNearestEven};
  for (long c = 0; c < cases; ++c) {
    // Widths up to 53 so the value is exact in a double.
    const int width = 2 + static_cast<int>(prng.uniform_below(52));
    const int frac = static_cast<int>(prng.uniform_below(static_cast<std::uint64_t>(width + 1)));
    const auto fmt = FixedPointFormat::make(width - frac, frac);
    const std::uint64_t span = std::uint64_t{1} << width;
    const auto raw = static_cast<std::int64_t>(prng.next_u64() % span) - static_cast<std::int64_t>(span / 2);
    const FixedPointValue v{raw, fmt};
    for (auto mode : modes) {
      OverflowPolicy policy(OverflowMode::kTrap);
      auto q = quantize(v.to_double(), fmt, mode, policy);
      if (q.raw != v.raw || policy.count() != 0) {
        fail(r, fmt.to_string() + " raw=" + std::to_string(raw) + " " + to_string(mode));
      }
    }
    ++r.cases;
  }
  return r;
}

}  // namespace fxtfhe::props

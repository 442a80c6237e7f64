#include <benchmark/benchmark.h>

#include "fxtfhe/bootstrapping_key.hpp"
#include "fxtfhe/keys.hpp"
#include "fxtfhe/pbs.hpp"

namespace {

using namespace fxtfhe;

struct Fixture {
  TfheParams params;
  SecretKeys keys;
  TransformPlans plans;
  BootstrappingKey bk;

  Fixture(const TfheParams& p, bool fixed)
      : params(p),
        keys(keygen(p, 7)),
        plans(fixed ? TransformPlans::fixed(p.N, DatapathFormats::table3(p)) : TransformPlans::reference(p.N)),
        bk(BootstrappingKey::generate(keys, p, plans, 7)) {}
};

const Fixture& fixture(int set, bool fixed) {
  static Fixture f[2][2] = {{Fixture(TfheParams::set_i(), false), Fixture(TfheParams::set_i(), true)},
                            {Fixture(TfheParams::set_ii(), false), Fixture(TfheParams::set_ii(), true)}};
  return f[set][fixed ? 1 : 0];
}

void BM_ExternalProduct(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)), state.range(1) != 0);
  Prng prng(5);
  TglweCiphertext c;
  for (int p = 0; p < f.params.k; ++p) c.a.push_back(uniform_torus_polynomial(prng, static_cast<std::size_t>(f.params.N)));
  c.b = uniform_torus_polynomial(prng, static_cast<std::size_t>(f.params.N));
  const GadgetParams g{f.params.beta, f.params.l, TieRule::kHalfUp};
  OverflowPolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(external_product(c, f.bk.entry(0), f.plans, g, policy));
  state.SetLabel(f.params.name + (state.range(1) ? " fixed" : " reference"));
}
BENCHMARK(BM_ExternalProduct)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_Bootstrap(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)), state.range(1) != 0);
  Prng prng(6);
  const TlweCiphertext ct = tlwe_encrypt(encode_bool(true), f.keys.tlwe_key, f.params.sigma_tlwe, prng);
  const TestPolynomial lut = constant_lut(encode_bool(true), f.params.N);
  OverflowPolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(programmable_bootstrap(ct, lut, f.bk, f.plans, policy));
  state.SetLabel(f.params.name + (state.range(1) ? " fixed" : " reference"));
}
BENCHMARK(BM_Bootstrap)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

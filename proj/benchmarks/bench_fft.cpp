#include <benchmark/benchmark.h>

#include "fxtfhe/negacyclic_fft.hpp"
#include "fxtfhe/params.hpp"
#include "fxtfhe/random.hpp"

namespace {

using namespace fxtfhe;

TransformPlans plans_for(int N, bool fixed) {
  if (!fixed) return TransformPlans::reference(N);
  return TransformPlans::fixed(N, DatapathFormats::table3(N == 512 ? TfheParams::set_i() : TfheParams::set_ii()));
}

IntPolynomial random_digits(int N, Prng& prng) {
  IntPolynomial q(static_cast<std::size_t>(N));
  for (auto& v : q) v = static_cast<std::int32_t>(prng.uniform_below(256)) - 128;
  return q;
}

void BM_FftForward(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto plans = plans_for(N, state.range(1) != 0);
  Prng prng(1);
  const IntPolynomial q = random_digits(N, prng);
  OverflowPolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(fft_forward(q, plans.forward, policy));
  state.SetLabel(state.range(1) ? "fixed" : "reference");
}
BENCHMARK(BM_FftForward)->ArgsProduct({{512, 1024}, {0, 1}});

void BM_FftInverse(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto plans = plans_for(N, state.range(1) != 0);
  Prng prng(2);
  OverflowPolicy policy;
  FftDomainPoly acc = plans.zero_accumulator();
  pointwise_mac(acc, fft_forward(random_digits(N, prng), plans.forward, policy),
                plans.convert_bk(uniform_torus_polynomial(prng, static_cast<std::size_t>(N)), policy),
                plans.datapath_rounding, policy);
  for (auto _ : state) benchmark::DoNotOptimize(fft_inverse(acc, plans.inverse, policy));
  state.SetLabel(state.range(1) ? "fixed" : "reference");
}
BENCHMARK(BM_FftInverse)->ArgsProduct({{512, 1024}, {0, 1}});

void BM_NegacyclicMultiply(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto plans = plans_for(N, state.range(1) != 0);
  Prng prng(3);
  const TorusPolynomial p = uniform_torus_polynomial(prng, static_cast<std::size_t>(N));
  const IntPolynomial q = random_digits(N, prng);
  OverflowPolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(negacyclic_multiply(p, q, plans, policy));
  state.SetLabel(state.range(1) ? "fixed" : "reference");
}
BENCHMARK(BM_NegacyclicMultiply)->ArgsProduct({{512, 1024}, {0, 1}});

void BM_Schoolbook(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  Prng prng(4);
  const TorusPolynomial p = uniform_torus_polynomial(prng, static_cast<std::size_t>(N));
  const IntPolynomial q = random_digits(N, prng);
  for (auto _ : state) benchmark::DoNotOptimize(mul_schoolbook(p, q));
}
BENCHMARK(BM_Schoolbook)->Arg(512)->Arg(1024);

}  // namespace

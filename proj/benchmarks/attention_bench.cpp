// Microbenchmarks for the two attention paths and the spectral transform.
// The acceptance-level timing comparison lives in the library's
// run_attention_bench; these targets are for interactive profiling.

#include <benchmark/benchmark.h>

#include "mafnet/aahf.hpp"
#include "mafnet/fft.hpp"
#include "mafnet/rng.hpp"

namespace {

using mafnet::Tensor;

Tensor random_matrix(std::int64_t rows, std::int64_t cols, std::uint64_t seed) {
  mafnet::Rng rng(seed, 0);
  return Tensor::uniform({rows, cols}, rng, -1.0, 1.0);
}

void bm_full_attention(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const std::int64_t d = 32;
  const Tensor q = random_matrix(n, d, 1);
  const Tensor k = random_matrix(n, d, 2);
  const Tensor v = random_matrix(n, d, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mafnet::full_attention(q, k, v));
  }
  state.SetComplexityN(n);
}

void bm_lin_attention(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const std::int64_t rank = state.range(1);
  const std::int64_t d = 32;
  const Tensor q = random_matrix(n, d, 1);
  const Tensor k = random_matrix(n, d, 2);
  const Tensor v = random_matrix(n, d, 3);
  const Tensor e = mafnet::averaging_projection(rank, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mafnet::lin_attention(q, k, v, e, e));
  }
  state.SetComplexityN(n);
}

void bm_rfft2(benchmark::State& state) {
  const std::int64_t side = state.range(0);
  mafnet::Rng rng(5, 0);
  const Tensor img = Tensor::uniform({side, side}, -1.0, 1.0, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mafnet::rfft2(img));
  }
}

}  // namespace

BENCHMARK(bm_full_attention)
    ->Arg(1024)
    ->Arg(4096)
    ->Arg(8192)
    ->Arg(16384)
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oNSquared);

BENCHMARK(bm_lin_attention)
    ->Args({1024, 64})
    ->Args({4096, 64})
    ->Args({8192, 64})
    ->Args({16384, 64})
    ->Args({1024, 256})
    ->Args({4096, 256})
    ->Args({8192, 256})
    ->Args({16384, 256})
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oN);

BENCHMARK(bm_rfft2)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

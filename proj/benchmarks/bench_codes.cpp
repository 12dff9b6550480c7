#include <benchmark/benchmark.h>

#include <random>

#include "hashemb/codes.hpp"
#include "hashemb/encoder.hpp"

using namespace hashemb;

static void BM_PackUnpack(benchmark::State& state) {
  const auto c = static_cast<std::uint32_t>(state.range(0));
  const std::uint32_t m = 16;
  std::mt19937_64 gen(1);
  std::vector<std::uint32_t> code(m);
  for (auto& e : code) e = static_cast<std::uint32_t>(gen() % c);
  for (auto _ : state) {
    const auto packed = pack_code(code, c);
    benchmark::DoNotOptimize(unpack_code(packed, c, m));
  }
}
BENCHMARK(BM_PackUnpack)->Arg(4)->Arg(16)->Arg(256);

static void BM_CountCollisions(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto codes = random_codes(n, {2, 24, 3, ThresholdMode::random_baseline});
  for (auto _ : state) benchmark::DoNotOptimize(count_collisions(codes));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_CountCollisions)->Arg(20000)->Arg(200000);

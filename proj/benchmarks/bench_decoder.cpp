#include <benchmark/benchmark.h>

#include <numeric>

#include "hashemb/decoder.hpp"
#include "hashemb/encoder.hpp"

using namespace hashemb;

static void BM_DecodeBatch(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto variant = state.range(1) ? DecoderVariant::full : DecoderVariant::light;
  const auto codes = random_codes(10000, {256, 16, 1, ThresholdMode::random_baseline});
  const auto params = init_decoder({256, 16, 512, 512, 64, 3, variant, 2});
  std::vector<std::size_t> rows(batch);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(decode_batch(codes, rows, params));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_DecodeBatch)->Args({256, 0})->Args({256, 1})->Unit(benchmark::kMillisecond);

static void BM_DecodeTrainStep(benchmark::State& state) {
  const std::size_t batch = 256;
  const auto codes = random_codes(batch, {256, 16, 1, ThresholdMode::random_baseline});
  const auto params = init_decoder({256, 16, 128, 128, 64, 3, DecoderVariant::full, 2});
  std::vector<std::size_t> rows(batch);
  std::iota(rows.begin(), rows.end(), 0);
  const auto target = Tensor::zeros({batch, 64});
  AdamW opt(params.trainable(), {});
  for (auto _ : state) {
    opt.zero_grad();
    nn::mse_loss(decode_batch(codes, rows, params), target).backward();
    opt.step();
  }
}
BENCHMARK(BM_DecodeTrainStep)->Unit(benchmark::kMillisecond);

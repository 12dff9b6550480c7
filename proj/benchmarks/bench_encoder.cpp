#include <benchmark/benchmark.h>

#include "hashemb/encoder.hpp"
#include "hashemb/gnn.hpp"
#include "hashemb/synth.hpp"

using namespace hashemb;

namespace {

CsrMatrix sbm_adjacency(std::size_t per_community) {
  SbmConfig cfg;
  cfg.nodes_per_community = per_community;
  cfg.p_in = 20.0 / static_cast<double>(per_community);
  cfg.p_out = cfg.p_in / 25.0;
  const auto graph = gen_sbm(cfg);
  const auto g = GraphStore::from_edges(graph.n, graph.edges);
  std::vector<std::size_t> ptr{0};
  std::vector<std::uint32_t> cols;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    for (auto u : g.neighbors(v)) cols.push_back(u);
    ptr.push_back(cols.size());
  }
  return CsrMatrix(g.n(), g.n(), ptr, cols, std::vector<double>(cols.size(), 1.0));
}

}  // namespace

static void BM_EncodeSparse(benchmark::State& state) {
  const auto a = sbm_adjacency(static_cast<std::size_t>(state.range(0)));
  const EncoderConfig cfg{256, 16, 42, ThresholdMode::median};
  for (auto _ : state) benchmark::DoNotOptimize(encode(a, cfg));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * a.n_rows()));
}
BENCHMARK(BM_EncodeSparse)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_EncodeDense(benchmark::State& state) {
  ClusterEmbConfig cfg;
  cfg.points_per_cluster = static_cast<std::size_t>(state.range(0));
  cfg.dim = 64;
  const auto a = gen_cluster_embeddings(cfg);
  DenseRowSource src(a);
  const EncoderConfig ecfg{16, 8, 7, ThresholdMode::median};
  for (auto _ : state) benchmark::DoNotOptimize(encode(src, ecfg));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * a.rows));
}
BENCHMARK(BM_EncodeDense)->Arg(125)->Arg(2500)->Unit(benchmark::kMillisecond);

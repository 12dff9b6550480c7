#include "hashemb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hashemb/errors.hpp"
#include "hashemb/rng.hpp"

namespace hashemb {

void SbmConfig::validate() const {
  if (communities < 1 || nodes_per_community < 1) {
    throw config_error("SBM: communities and nodes_per_community must be >= 1");
  }
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) {
    throw config_error("SBM: need 0 <= p_out < p_in <= 1");
  }
}

SbmGraph gen_sbm(const SbmConfig& cfg) {
  cfg.validate();
  SbmGraph g;
  g.n = cfg.communities * cfg.nodes_per_community;
  g.labels.resize(g.n);
  for (std::size_t v = 0; v < g.n; ++v) {
    g.labels[v] = static_cast<std::uint32_t>(v / cfg.nodes_per_community);
  }
  Rng rng(cfg.seed);
  for (std::size_t u = 0; u < g.n; ++u) {
    for (std::size_t v = u + 1; v < g.n; ++v) {
      const double p = g.labels[u] == g.labels[v] ? cfg.p_in : cfg.p_out;
      if (rng.bernoulli(p)) {
        g.edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
      }
    }
  }
  return g;
}

void write_edge_list(std::ostream& out, const SbmGraph& graph) {
  out << "# nodes " << graph.n << '\n';
  for (const auto& [u, v] : graph.edges) out << u << ' ' << v << '\n';
}

void ClusterEmbConfig::validate() const {
  if (clusters < 1 || points_per_cluster < 1 || dim < 1) {
    throw config_error("cluster embeddings: counts must be >= 1");
  }
  if (!(noise_scale >= 0.0 && noise_scale < center_scale)) {
    throw config_error("cluster embeddings: need 0 <= noise_scale < center_scale");
  }
}

DenseMatrix gen_cluster_embeddings(const ClusterEmbConfig& cfg) {
  cfg.validate();
  DenseMatrix out(cfg.clusters * cfg.points_per_cluster, cfg.dim);
  Rng rng(cfg.seed);
  std::vector<double> center(cfg.dim);
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    for (auto& x : center) x = cfg.center_scale * rng.normal();
    for (std::size_t p = 0; p < cfg.points_per_cluster; ++p) {
      auto row = out.row(c * cfg.points_per_cluster + p);
      for (std::size_t j = 0; j < cfg.dim; ++j) {
        row[j] = static_cast<float>(center[j] + cfg.noise_scale * rng.normal());
      }
    }
  }
  return out;
}

Splits make_splits(std::size_t n, double train_fraction, double valid_fraction,
                   std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && valid_fraction >= 0.0 && train_fraction + valid_fraction <= 1.0)) {
    throw config_error("make_splits: fractions must be non-negative and sum to at most 1");
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(seed);
  rng.shuffle(std::span(order));
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(n))));
  Splits s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace hashemb

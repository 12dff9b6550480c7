#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hashemb/dense.hpp"
#include "hashemb/gnn.hpp"

namespace hashemb {

struct SbmConfig {
  std::size_t communities = 4;
  std::size_t nodes_per_community = 500;
  double p_in = 0.05;
  double p_out = 0.002;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SbmGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // u < v, sorted
  std::vector<std::uint32_t> labels;                           // community of each node

  bool operator==(const SbmGraph&) const = default;
};

/// Stochastic block model: node i belongs to community i / nodes_per_community;
/// each unordered pair is an edge with p_in (same community) or p_out.
SbmGraph gen_sbm(const SbmConfig& cfg);

/// Edge-list text, one "u v" per line, preceded by a '#' comment line with
/// the node count.
void write_edge_list(std::ostream& out, const SbmGraph& graph);

struct ClusterEmbConfig {
  std::size_t clusters = 8;
  std::size_t points_per_cluster = 125;
  std::size_t dim = 32;
  double center_scale = 1.0;
  double noise_scale = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Rows grouped by cluster: center ~ N(0, center_scale²)^dim, point =
/// center + N(0, noise_scale²)^dim.
DenseMatrix gen_cluster_embeddings(const ClusterEmbConfig& cfg);

/// Random partition of [0, n) into train/valid/test with the given
/// fractions (test takes the remainder). Each list is sorted.
Splits make_splits(std::size_t n, double train_fraction, double valid_fraction,
                   std::uint64_t seed);

}  // namespace hashemb

#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hashemb/errors.hpp"
#include "hashemb/sparse.hpp"
#include "hashemb/synth.hpp"

using namespace hashemb;

TEST_CASE("extreme SBM gives disjoint cliques") {
  SbmConfig cfg;
  cfg.communities = 2;
  cfg.nodes_per_community = 3;
  cfg.p_in = 1.0;
  cfg.p_out = 0.0;
  const auto g = gen_sbm(cfg);
  using E = std::pair<std::uint32_t, std::uint32_t>;
  CHECK(g.edges == std::vector<E>{{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});
  CHECK(g.labels == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
  CHECK(g.n == 6);
}

TEST_CASE("SBM is deterministic and hits its densities") {
  SbmConfig cfg;
  cfg.seed = 7;
  const auto g = gen_sbm(cfg);
  CHECK(g == gen_sbm(cfg));
  cfg.seed = 8;
  CHECK_FALSE(g == gen_sbm(cfg));

  std::size_t intra = 0, inter = 0;
  for (const auto& [u, v] : g.edges) {
    CHECK(u < v);
    (g.labels[u] == g.labels[v] ? intra : inter)++;
  }
  const double intra_pairs = 4.0 * 500 * 499 / 2;
  const double inter_pairs = 2000.0 * 1999 / 2 - intra_pairs;
  CHECK(std::abs(intra / intra_pairs - 0.05) <= 0.2 * 0.05);
  CHECK(std::abs(inter / inter_pairs - 0.002) <= 0.2 * 0.002);
}

TEST_CASE("SBM edge list parses back") {
  SbmConfig cfg;
  cfg.communities = 3;
  cfg.nodes_per_community = 40;
  cfg.p_in = 0.01;
  cfg.p_out = 0.0;
  cfg.seed = 1;
  const auto g = gen_sbm(cfg);
  std::stringstream text;
  write_edge_list(text, g);
  CHECK(text.str().rfind("# nodes 120\n", 0) == 0);
  const auto m = load_edge_list(text, true, g.n);
  CHECK(m.n_rows() == g.n);
  CHECK(m.nnz() == 2 * g.edges.size());
}

TEST_CASE("SBM validation") {
  SbmConfig cfg;
  cfg.p_in = 0.1;
  cfg.p_out = 0.1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.p_out = -0.1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.p_out = 0.0;
  cfg.p_in = 1.5;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("cluster embeddings") {
  ClusterEmbConfig cfg;
  cfg.clusters = 4;
  cfg.points_per_cluster = 30;
  cfg.dim = 8;
  cfg.seed = 3;
  const auto a = gen_cluster_embeddings(cfg);
  CHECK(a.rows == 120);
  CHECK(a.cols == 8);
  CHECK(a == gen_cluster_embeddings(cfg));

  const auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols; ++k) s += (a(i, k) - a(j, k)) * (a(i, k) - a(j, k));
    return std::sqrt(s);
  };
  double within = 0.0, between = 0.0;
  std::size_t nw = 0, nb = 0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = i + 1; j < a.rows; ++j) {
      if (i / 30 == j / 30) {
        within += dist(i, j);
        ++nw;
      } else {
        between += dist(i, j);
        ++nb;
      }
    }
  }
  CHECK(within / nw < between / nb);

  cfg.noise_scale = 0.0;
  const auto flat = gen_cluster_embeddings(cfg);
  for (std::size_t i = 0; i < flat.rows; ++i) {
    const auto first = flat.row(i - i % 30);
    const auto row = flat.row(i);
    CHECK(std::equal(row.begin(), row.end(), first.begin()));
  }

  cfg.noise_scale = 2.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("make_splits") {
  const auto s = make_splits(100, 0.7, 0.1, 4);
  CHECK(s.train.size() == 70);
  CHECK(s.valid.size() == 10);
  CHECK(s.test.size() == 20);
  std::set<std::uint32_t> all(s.train.begin(), s.train.end());
  all.insert(s.valid.begin(), s.valid.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  const auto again = make_splits(100, 0.7, 0.1, 4);
  CHECK(again.train == s.train);
  CHECK_THROWS_AS(make_splits(10, 0.8, 0.3, 0), config_error);
}

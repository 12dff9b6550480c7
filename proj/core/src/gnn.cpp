#include "hashemb/gnn.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "hashemb/errors.hpp"

namespace hashemb {

GraphStore::GraphStore(const CsrMatrix& adjacency) {
  if (adjacency.n_rows() != adjacency.n_cols()) {
    throw shape_error("GraphStore: adjacency must be square");
  }
  const std::size_t n = adjacency.n_rows();
  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto row = adjacency.row(v);
    for (const auto u : row.cols) {
      if (u == v) continue;
      const auto back = adjacency.row(u).cols;
      if (!std::binary_search(back.begin(), back.end(), static_cast<std::uint32_t>(v))) {
        throw shape_error("GraphStore: adjacency is not symmetric at (" + std::to_string(v) +
                          ", " + std::to_string(u) + ")");
      }
      adjacency_.push_back(u);
    }
    offsets_[v + 1] = adjacency_.size();
  }
}

GraphStore GraphStore::from_edges(
    std::size_t n, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> both;
  both.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw range_error("GraphStore::from_edges: node id >= n");
    if (u == v) continue;
    both.emplace_back(u, v);
    both.emplace_back(v, u);
  }
  std::sort(both.begin(), both.end());
  both.erase(std::unique(both.begin(), both.end()), both.end());
  GraphStore g;
  g.offsets_.assign(n + 1, 0);
  for (const auto& [u, v] : both) {
    ++g.offsets_[u + 1];
    g.adjacency_.push_back(v);
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  return g;
}

std::span<const std::uint32_t> GraphStore::neighbors(std::uint32_t v) const {
  if (v >= n()) throw range_error("GraphStore::neighbors: node " + std::to_string(v) + " >= n");
  return std::span(adjacency_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
}

std::vector<std::uint32_t> sample_neighbors(const GraphStore& g,
                                            std::span<const std::uint32_t> nodes,
                                            std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> out;
  out.reserve(nodes.size() * k);
  for (const auto v : nodes) {
    const auto adj = g.neighbors(v);
    for (std::size_t j = 0; j < k; ++j) {
      out.push_back(adj.empty() ? v : adj[static_cast<std::size_t>(rng.below(adj.size()))]);
    }
  }
  return out;
}

Tensor aggregate_mean(const Tensor& h, std::size_t k) { return nn::group_mean(h, k); }

Tensor sage_layer(const Tensor& hhat, const Tensor& x, const nn::Linear& layer) {
  return nn::relu(layer(nn::concat_cols(hhat, x)));
}

void SageConfig::validate() const {
  if (k < 1) throw config_error("GraphSAGE: k must be >= 1");
  if (hidden < 1) throw config_error("GraphSAGE: hidden width must be >= 1");
  if (classes < 1) throw config_error("GraphSAGE: need at least one class");
}

std::vector<Tensor> SageParams::trainable() const {
  return {layer1.weight, layer1.bias, layer2.weight, layer2.bias, output.weight, output.bias};
}

SageParams SageParams::clone() const {
  const auto copy = [](const nn::Linear& l) {
    return nn::Linear{l.weight.clone(true), l.bias.clone(true)};
  };
  return {copy(layer1), copy(layer2), copy(output)};
}

SageParams init_sage(const SageConfig& cfg, std::size_t d_e) {
  cfg.validate();
  Rng rng(cfg.seed);
  SageParams p;
  p.layer1 = nn::make_linear(2 * d_e, cfg.hidden, rng);
  p.layer2 = nn::make_linear(2 * cfg.hidden, cfg.hidden, rng);
  p.output = nn::make_linear(cfg.hidden, cfg.classes, rng);
  return p;
}

SageBatch sample_batch(const GraphStore& g, std::span<const std::uint32_t> nodes,
                       std::size_t k, Rng& rng) {
  SageBatch batch;
  batch.k = k;
  batch.nodes.assign(nodes.begin(), nodes.end());
  batch.first = sample_neighbors(g, batch.nodes, k, rng);
  batch.second = sample_neighbors(g, batch.first, k, rng);
  return batch;
}

Tensor forward_batch(const SageBatch& batch, const CodeMatrix& codes,
                     const DecoderParams& dparams, const SageParams& sparams) {
  const std::size_t k = batch.k;
  if (k == 0 || batch.first.size() != batch.nodes.size() * k ||
      batch.second.size() != batch.first.size() * k) {
    throw shape_error("forward_batch: sampled lists do not match k");
  }
  // Decode each distinct node once, then gather per role.
  std::vector<std::uint32_t> distinct;
  distinct.reserve(batch.nodes.size() + batch.first.size() + batch.second.size());
  distinct.insert(distinct.end(), batch.nodes.begin(), batch.nodes.end());
  distinct.insert(distinct.end(), batch.first.begin(), batch.first.end());
  distinct.insert(distinct.end(), batch.second.begin(), batch.second.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const auto positions = [&](std::span<const std::uint32_t> ids) {
    std::vector<std::size_t> pos(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      pos[i] = static_cast<std::size_t>(
          std::lower_bound(distinct.begin(), distinct.end(), ids[i]) - distinct.begin());
    }
    return pos;
  };
  const std::vector<std::size_t> rows(distinct.begin(), distinct.end());
  const Tensor features = decode_batch(codes, rows, dparams);
  const Tensor x_self = nn::gather_rows(features, positions(batch.nodes));
  const Tensor x_first = nn::gather_rows(features, positions(batch.first));
  const Tensor x_second = nn::gather_rows(features, positions(batch.second));

  const Tensor h1_self = sage_layer(aggregate_mean(x_first, k), x_self, sparams.layer1);
  const Tensor h1_first = sage_layer(aggregate_mean(x_second, k), x_first, sparams.layer1);
  const Tensor h2_self = sage_layer(aggregate_mean(h1_first, k), h1_self, sparams.layer2);
  return sparams.output(h2_self);
}

Tensor forward_batch(const GraphStore& g, std::span<const std::uint32_t> nodes,
                     const CodeMatrix& codes, const DecoderParams& dparams,
                     const SageParams& sparams, std::size_t k, Rng& rng) {
  return forward_batch(sample_batch(g, nodes, k, rng), codes, dparams, sparams);
}

double Evaluation::hit_at(std::size_t k) const {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == k) return hit[i];
  }
  throw domain_error("Evaluation: hit@" + std::to_string(k) + " was not computed");
}

Evaluation evaluate(std::span<const double> logits, std::size_t classes,
                    std::span<const std::uint32_t> labels, std::span<const std::size_t> ks) {
  if (classes == 0 || logits.size() != labels.size() * classes) {
    throw shape_error("evaluate: logits do not match labels x classes");
  }
  for (const auto k : ks) {
    if (k < 1 || k > classes) {
      throw domain_error("evaluate: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(classes) + "]");
    }
  }
  Evaluation ev;
  ev.ks.assign(ks.begin(), ks.end());
  ev.hit.assign(ks.size(), 0.0);
  if (labels.empty()) return ev;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto label = labels[r];
    if (label >= classes) throw range_error("evaluate: label out of range");
    const auto row = logits.subspan(r * classes, classes);
    // Rank of the label: classes ordered by logit descending, ties by id.
    std::size_t rank = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (row[c] > row[label] || (row[c] == row[label] && c < label)) ++rank;
    }
    if (rank == 0) ++correct;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (rank < ks[i]) ev.hit[i] += 1.0;
    }
  }
  const auto total = static_cast<double>(labels.size());
  ev.accuracy = static_cast<double>(correct) / total;
  for (auto& h : ev.hit) h /= total;
  return ev;
}

Evaluation evaluate(const Tensor& logits, std::span<const std::uint32_t> labels,
                    std::span<const std::size_t> ks) {
  if (logits.rank() != 2) throw shape_error("evaluate: logits must be [B, K]");
  return evaluate(logits.data(), logits.dim(1), labels, ks);
}

void NodeTrainConfig::validate() const {
  if (epochs < 1) throw config_error("epochs must be >= 1");
  if (batch_size < 1) throw config_error("batch_size must be >= 1");
  optimizer.validate();
}

namespace {

std::vector<std::uint32_t> labels_of(std::span<const std::uint32_t> labels,
                                     std::span<const std::uint32_t> nodes) {
  std::vector<std::uint32_t> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= labels.size() || labels[nodes[i]] == kNoLabel) {
      throw config_error("node " + std::to_string(nodes[i]) + " is in a split but has no label");
    }
    out[i] = labels[nodes[i]];
  }
  return out;
}

constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kEvalStream = 1;

}  // namespace

Evaluation evaluate_nodes(const GraphStore& g, const CodeMatrix& codes,
                          std::span<const std::uint32_t> labels,
                          std::span<const std::uint32_t> nodes, const DecoderParams& dparams,
                          const SageParams& sparams, std::size_t k, std::size_t batch_size,
                          std::uint64_t sample_seed, std::span<const std::size_t> ks) {
  const std::size_t classes = sparams.output.out_features();
  Rng rng(sample_seed);
  std::vector<double> logits;
  logits.reserve(nodes.size() * classes);
  for (std::size_t start = 0; start < nodes.size(); start += batch_size) {
    const auto chunk = nodes.subspan(start, std::min(batch_size, nodes.size() - start));
    const Tensor out = forward_batch(g, chunk, codes, dparams, sparams, k, rng);
    logits.insert(logits.end(), out.data().begin(), out.data().end());
  }
  return evaluate(logits, classes, labels_of(labels, nodes), ks);
}

NodeTrainResult train_node_classification(const GraphStore& g, const CodeMatrix& codes,
                                          std::span<const std::uint32_t> labels,
                                          const Splits& splits, const SageConfig& scfg,
                                          const DecoderConfig& dcfg, const NodeTrainConfig& ncfg,
                                          const NodeEpochCallback& on_epoch) {
  scfg.validate();
  ncfg.validate();
  if (splits.train.empty() || splits.valid.empty() || splits.test.empty()) {
    throw config_error("train_node_classification: train, valid and test splits must be non-empty");
  }
  if (codes.n() != g.n()) {
    throw config_error("train_node_classification: " + std::to_string(codes.n()) +
                       " codes for a graph of " + std::to_string(g.n()) + " nodes");
  }
  {
    std::vector<std::uint32_t> all;
    all.insert(all.end(), splits.train.begin(), splits.train.end());
    all.insert(all.end(), splits.valid.begin(), splits.valid.end());
    all.insert(all.end(), splits.test.begin(), splits.test.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw config_error("train_node_classification: splits overlap");
    }
    for (const auto v : all) {
      if (v >= g.n()) throw range_error("split node id " + std::to_string(v) + " >= n");
    }
  }
  // Every split node must carry a label.
  (void)labels_of(labels, splits.train);
  (void)labels_of(labels, splits.valid);
  (void)labels_of(labels, splits.test);

  DecoderParams dparams = init_decoder(dcfg);
  SageParams sparams = init_sage(scfg, dcfg.d_e);
  std::vector<Tensor> params = dparams.trainable();
  for (auto& t : sparams.trainable()) params.push_back(t);
  AdamW optimizer(params, ncfg.optimizer);

  Rng rng(derive_seed(ncfg.seed, kTrainStream));
  const std::uint64_t eval_seed = derive_seed(ncfg.seed, kEvalStream);
  std::vector<std::uint32_t> order(splits.train.begin(), splits.train.end());
  const std::vector<std::size_t> accuracy_only;

  NodeTrainResult result;
  double best_valid = -1.0;
  for (std::size_t epoch = 0; epoch < ncfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += ncfg.batch_size) {
      const auto chunk =
          std::span(order).subspan(start, std::min(ncfg.batch_size, order.size() - start));
      const auto batch_labels = labels_of(labels, chunk);
      optimizer.zero_grad();
      Tensor loss = nn::cross_entropy(
          forward_batch(g, chunk, codes, dparams, sparams, scfg.k, rng), batch_labels);
      loss.backward();
      optimizer.step();
      weighted += loss.item() * static_cast<double>(chunk.size());
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = weighted / static_cast<double>(order.size());
    metrics.valid_accuracy = evaluate_nodes(g, codes, labels, splits.valid, dparams, sparams,
                                            scfg.k, ncfg.batch_size, eval_seed, accuracy_only)
                                 .accuracy;
    metrics.test = evaluate_nodes(g, codes, labels, splits.test, dparams, sparams, scfg.k,
                                  ncfg.batch_size, eval_seed, ncfg.ks);
    if (metrics.valid_accuracy > best_valid) {
      best_valid = metrics.valid_accuracy;
      result.best_epoch = epoch;
      result.test = metrics.test;
      result.decoder = dparams.clone();
      result.sage = sparams.clone();
    }
    result.history.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::uint64_t node = 0;
    std::string value, extra;
    if (!(ls >> node >> value) || (ls >> extra)) {
      throw parse_error(path.string() + " line " + std::to_string(line_no) +
                        ": expected 'node_id value'");
    }
    fn(node, value, line_no);
  }
}

}  // namespace

std::vector<std::uint32_t> read_labels(const std::filesystem::path& path, std::size_t n) {
  std::vector<std::uint32_t> labels(n, kNoLabel);
  for_each_record(path, [&](std::uint64_t node, const std::string& value, std::size_t line_no) {
    if (node >= n) {
      throw range_error(path.string() + " line " + std::to_string(line_no) + ": node id >= n");
    }
    std::size_t used = 0;
    unsigned long label = 0;
    try {
      label = std::stoul(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || label >= kNoLabel) {
      throw parse_error(path.string() + " line " + std::to_string(line_no) + ": bad label id");
    }
    labels[node] = static_cast<std::uint32_t>(label);
  });
  return labels;
}

void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw parse_error("cannot open " + path.string() + " for writing");
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] != kNoLabel) out << v << ' ' << labels[v] << '\n';
  }
}

Splits read_splits(const std::filesystem::path& path, std::size_t n) {
  Splits s;
  for_each_record(path, [&](std::uint64_t node, const std::string& value, std::size_t line_no) {
    if (node >= n) {
      throw range_error(path.string() + " line " + std::to_string(line_no) + ": node id >= n");
    }
    const auto id = static_cast<std::uint32_t>(node);
    if (value == "train") s.train.push_back(id);
    else if (value == "valid") s.valid.push_back(id);
    else if (value == "test") s.test.push_back(id);
    else {
      throw parse_error(path.string() + " line " + std::to_string(line_no) +
                        ": split must be train, valid or test");
    }
  });
  return s;
}

void write_splits(const std::filesystem::path& path, const Splits& splits) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw parse_error("cannot open " + path.string() + " for writing");
  for (const auto v : splits.train) out << v << " train\n";
  for (const auto v : splits.valid) out << v << " valid\n";
  for (const auto v : splits.test) out << v << " test\n";
}

}  // namespace hashemb

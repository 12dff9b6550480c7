#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "hashemb/codes.hpp"
#include "hashemb/decoder.hpp"
#include "hashemb/nn.hpp"
#include "hashemb/optim.hpp"
#include "hashemb/rng.hpp"
#include "hashemb/sparse.hpp"

namespace hashemb {

/// Undirected adjacency lists for neighbor sampling. Lists are sorted,
/// deduplicated, symmetric, and exclude the node itself.
class GraphStore {
 public:
  GraphStore() : offsets_{0} {}
  /// Builds from a square adjacency matrix; throws shape_error if it is not
  /// symmetric. Diagonal entries are dropped.
  explicit GraphStore(const CsrMatrix& adjacency);
  /// Builds from an edge list, adding both directions.
  static GraphStore from_edges(std::size_t n,
                               std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

  std::size_t n() const { return offsets_.size() - 1; }
  std::span<const std::uint32_t> neighbors(std::uint32_t v) const;
  std::size_t degree(std::uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> adjacency_;
};

/// k draws with replacement from each node's neighbors, in input order
/// (node-major). An isolated node draws itself k times.
std::vector<std::uint32_t> sample_neighbors(const GraphStore& g,
                                            std::span<const std::uint32_t> nodes,
                                            std::size_t k, Rng& rng);

/// Mean over consecutive groups of k rows: [G·k, D] → [G, D].
Tensor aggregate_mean(const Tensor& h, std::size_t k);

/// ReLU(W·[hhat ‖ x] + b) for a batch of rows.
Tensor sage_layer(const Tensor& hhat, const Tensor& x, const nn::Linear& layer);

struct SageConfig {
  static constexpr std::size_t layers = 2;
  std::size_t hidden = 128;
  std::size_t k = 15;
  std::size_t classes = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SageParams {
  nn::Linear layer1;  // 2·d_e → hidden
  nn::Linear layer2;  // 2·hidden → hidden
  nn::Linear output;  // hidden → classes, no activation

  std::vector<Tensor> trainable() const;
  SageParams clone() const;
};

SageParams init_sage(const SageConfig& cfg, std::size_t d_e);

/// Sampled two-hop computation graph of one minibatch.
struct SageBatch {
  std::size_t k = 0;
  std::vector<std::uint32_t> nodes;   // B
  std::vector<std::uint32_t> first;   // B·k, first[b·k + j] belongs to nodes[b]
  std::vector<std::uint32_t> second;  // B·k·k, second[i·k + j] belongs to first[i]
};

SageBatch sample_batch(const GraphStore& g, std::span<const std::uint32_t> nodes,
                       std::size_t k, Rng& rng);

/// Logits [B, classes] for a sampled batch. Node features are decoded from
/// their codes, so gradients reach the decoder.
Tensor forward_batch(const SageBatch& batch, const CodeMatrix& codes,
                     const DecoderParams& dparams, const SageParams& sparams);

/// Samples with `rng`, then runs forward_batch.
Tensor forward_batch(const GraphStore& g, std::span<const std::uint32_t> nodes,
                     const CodeMatrix& codes, const DecoderParams& dparams,
                     const SageParams& sparams, std::size_t k, Rng& rng);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<std::size_t> ks;
  std::vector<double> hit;  // hit[i] is hit@ks[i]

  double hit_at(std::size_t k) const;
};

/// Accuracy and hit@k for row-major logits [labels.size(), classes]. Ties
/// rank the lower class id first. Throws domain_error if some k > classes.
Evaluation evaluate(std::span<const double> logits, std::size_t classes,
                    std::span<const std::uint32_t> labels, std::span<const std::size_t> ks);
Evaluation evaluate(const Tensor& logits, std::span<const std::uint32_t> labels,
                    std::span<const std::size_t> ks);

inline constexpr std::uint32_t kNoLabel = std::numeric_limits<std::uint32_t>::max();

struct Splits {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> valid;
  std::vector<std::uint32_t> test;
};

struct NodeTrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  AdamWConfig optimizer{0.01, 0.9, 0.999, 1e-8, 0.0};
  std::vector<std::size_t> ks{5, 10, 20};
  /// Seeds shuffling and training-time sampling; evaluation sampling uses
  /// a fixed stream derived from it.
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_accuracy = 0.0;
  Evaluation test;
};

struct NodeTrainResult {
  DecoderParams decoder;  // snapshot from the best-validation epoch
  SageParams sage;
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  Evaluation test;        // test metrics at best_epoch
};

using NodeEpochCallback = std::function<void(const EpochMetrics&)>;

/// Minibatch cross-entropy training of decoder + GraphSAGE with AdamW.
NodeTrainResult train_node_classification(const GraphStore& g, const CodeMatrix& codes,
                                          std::span<const std::uint32_t> labels,
                                          const Splits& splits, const SageConfig& scfg,
                                          const DecoderConfig& dcfg, const NodeTrainConfig& ncfg,
                                          const NodeEpochCallback& on_epoch = {});

/// Logits for `nodes` in batches, sampled with a generator seeded by
/// `sample_seed`.
Evaluation evaluate_nodes(const GraphStore& g, const CodeMatrix& codes,
                          std::span<const std::uint32_t> labels,
                          std::span<const std::uint32_t> nodes, const DecoderParams& dparams,
                          const SageParams& sparams, std::size_t k, std::size_t batch_size,
                          std::uint64_t sample_seed, std::span<const std::size_t> ks);

// Text formats: "node_id label_id" and "node_id {train|valid|test}" per line,
// '#' comments and blank lines ignored. Unlabeled nodes read as kNoLabel.
std::vector<std::uint32_t> read_labels(const std::filesystem::path& path, std::size_t n);
void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels);
Splits read_splits(const std::filesystem::path& path, std::size_t n);
void write_splits(const std::filesystem::path& path, const Splits& splits);

}  // namespace hashemb

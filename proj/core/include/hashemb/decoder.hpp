#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hashemb/codes.hpp"
#include "hashemb/dense.hpp"
#include "hashemb/nn.hpp"
#include "hashemb/optim.hpp"
#include "hashemb/tensor.hpp"

namespace hashemb {

struct DecoderConfig {
  std::uint32_t c = 2;
  std::uint32_t m = 128;
  std::size_t d_c = 512;
  std::size_t d_m = 512;
  std::size_t d_e = 64;
  std::size_t l = 3;
  DecoderVariant variant = DecoderVariant::light;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Codebooks, optional rescale vector and MLP of one decoder.
///
/// The m codebooks (c × d_c each) are stored stacked as one [m·c, d_c]
/// tensor; row j·c + k is vector k of codebook j. They are trainable only
/// in the full variant. `w0` exists only in the light variant.
struct DecoderParams {
  DecoderConfig config;
  Tensor codebooks;
  std::optional<Tensor> w0;
  std::vector<nn::Linear> mlp;

  /// Tensors the optimizer updates.
  std::vector<Tensor> trainable() const;
  /// Trainable scalar count; biases excluded unless asked for.
  std::size_t trainable_scalars(bool include_biases = false) const;
  /// Scalars held outside the optimizer (light codebooks).
  std::size_t frozen_scalars() const;

  /// Deep copy with fresh storage and the same trainability flags.
  DecoderParams clone() const;
};

/// Codebook values drawn i.i.d. N(0, 1)/√d_c from the config seed.
std::vector<double> codebook_values(const DecoderConfig& cfg);

/// Fresh decoder: codebooks per codebook_values, w0 all ones (light),
/// MLP d_c → d_m, (l−2)×(d_m → d_m), d_m → d_e.
DecoderParams init_decoder(const DecoderConfig& cfg);

/// Decodes integer codes laid out row-major as [B, m].
Tensor decode_codes(std::span<const std::uint32_t> integer_codes, const DecoderParams& params);

/// Embeddings [|rows|, d_e] for the given rows of `codes`: codebook lookup,
/// sum, w0 rescale (light), then the MLP with ReLU between layers.
Tensor decode_batch(const CodeMatrix& codes, std::span<const std::size_t> rows,
                    const DecoderParams& params);

struct ReconTrainConfig {
  std::size_t epochs = 1024;
  std::size_t batch_size = 512;
  AdamWConfig optimizer{};
  /// Seeds minibatch shuffling.
  std::uint64_t seed = 0;

  void validate() const;
};

struct ReconResult {
  DecoderParams params;
  std::vector<double> epoch_loss;  // mean per-element MSE over each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Minibatch AdamW fit of a fresh decoder so decode(codes[i]) ≈ targets[i].
ReconResult train_reconstruction(const CodeMatrix& codes, const DenseMatrix& targets,
                                 const ReconTrainConfig& cfg, const DecoderConfig& dcfg,
                                 const EpochCallback& on_epoch = {});

/// Decodes every row of `codes` (no gradient tracking kept).
DenseMatrix reconstruct(const CodeMatrix& codes, const DecoderParams& params,
                        std::size_t batch_size = 1024);

double mse(const DenseMatrix& a, const DenseMatrix& b);
/// Mean over rows of cosine similarity; rows with zero norm count as 0.
double mean_cosine_similarity(const DenseMatrix& a, const DenseMatrix& b);

/// Writes `<prefix>.manifest` (text) and `<prefix>.bin` (back-to-back GEF32
/// blocks, one per tensor). Light codebooks are not written; they are
/// regenerated from the seed on load.
void save_checkpoint(const std::filesystem::path& prefix, const DecoderParams& params);
DecoderParams load_checkpoint(const std::filesystem::path& prefix);

}  // namespace hashemb

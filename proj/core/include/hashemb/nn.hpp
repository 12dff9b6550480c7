#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hashemb/rng.hpp"
#include "hashemb/tensor.hpp"

// Differentiable operations. Shapes are noted as [rows, cols]; every op
// throws shape_error on mismatched inputs.
namespace hashemb::nn {

/// y = x·w + b with b broadcast over rows. x [B,in], w [in,out], b [out].
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

/// Elementwise max(0, x); the subgradient at exactly 0 is 0.
Tensor relu(const Tensor& x);

/// Mean of squared differences over all elements.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

/// Mean over rows of −log softmax(logits)[label], max-shifted.
/// Throws range_error if a label is not below the class count.
Tensor cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels);

/// Sum of all elements, as a scalar.
Tensor sum(const Tensor& x);

/// out[b] = Σ_j table[indices[b·group + j]]. table [R,D]; indices length B·group.
Tensor embedding_sum(const Tensor& table, std::span<const std::size_t> indices,
                     std::size_t group);

/// out[b, d] = x[b, d] · scale[d]. x [B,D], scale [D].
Tensor scale_columns(const Tensor& x, const Tensor& scale);

/// Mean of consecutive row groups: x [G·k, D] → [G, D].
Tensor group_mean(const Tensor& x, std::size_t k);

/// [a ‖ b] along columns: [B,p] and [B,q] → [B,p+q].
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Rows of x selected by index (repeats allowed): [R,D] → [len(idx), D].
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx);

/// Affine layer parameters; weight stored [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  Tensor operator()(const Tensor& x) const { return affine(x, weight, bias); }
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
};

/// Weights uniform in ±√(6/(in+out)), zero bias, both trainable.
Linear make_linear(std::size_t in, std::size_t out, Rng& rng);

/// Central-difference check of f's gradient with respect to `inputs`.
/// `f` must rebuild its graph from the current input data on every call and
/// return a scalar. Returns max over coordinates of
/// |analytic − numeric| / max(|analytic|, |numeric|, 1e-8).
/// Input data is restored before returning.
double grad_check(const std::function<Tensor()>& f, std::span<Tensor> inputs,
                  double epsilon = 1e-6);

}  // namespace hashemb::nn

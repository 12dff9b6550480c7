#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hashemb/tensor.hpp"

namespace hashemb {

struct AdamWConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  void validate() const;
};

/// First/second moment accumulators per parameter tensor plus the step count.
struct AdamWState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

/// One decoupled-weight-decay Adam update of every tensor in `params`
/// using their accumulated gradients:
///   m ← β1·m + (1−β1)·g,  v ← β2·v + (1−β2)·g²
///   p ← p − lr·m̂/(√v̂ + eps) − lr·wd·p
/// An empty state is zero-initialised on the first call; a state built for
/// different shapes throws shape_error.
void adamw_step(std::span<Tensor> params, AdamWState& state, const AdamWConfig& cfg);

/// Owns a parameter list and its AdamW state.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, AdamWConfig cfg);

  void zero_grad();
  void step();

  const AdamWState& state() const { return state_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  std::vector<Tensor> params_;
  AdamWConfig cfg_;
  AdamWState state_;
};

}  // namespace hashemb

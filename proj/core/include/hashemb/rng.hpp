#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace hashemb {

/// SplitMix64 finalizer. Used to turn (master seed, index) pairs into
/// well-separated sub-seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives the sub-seed for stream `index` of a master seed. Pure function,
/// so per-bit / per-trial streams never depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Deterministic random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard *distributions* are implementation-defined, so the
/// uniform, normal and bounded-integer mappings are implemented here to keep
/// results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal sample (Box-Muller, both outputs used).
  double normal();

  /// Uniform integer in [0, bound). `bound` must be non-zero.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hashemb

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hashemb/codes.hpp"
#include "hashemb/sparse.hpp"

namespace hashemb {

struct EncoderConfig {
  std::uint32_t c = 2;
  std::uint32_t m = 1;
  std::uint64_t seed = 0;
  ThresholdMode threshold = ThresholdMode::median;

  /// Throws domain_error unless c is a power of two >= 2 and m >= 1.
  void validate() const;
  std::size_t n_bit() const { return code_bits(c, m); }
};

/// Seed of the projection direction for bit `bit_index`.
std::uint64_t bit_seed(std::uint64_t master_seed, std::size_t bit_index);

/// d standard-normal samples from a generator seeded by `seed`.
std::vector<double> random_vector(std::size_t d, std::uint64_t seed);

/// zero → 0.0; median → element at sorted position ⌊(n−1)/2⌋ (lower middle).
/// Linear expected time; `u` is not modified. random_baseline is rejected.
double select_threshold(std::span<const double> u, ThresholdMode mode);

/// Random-projection hashing: bit i of row j is set iff
/// (A·v_i)[j] > t_i, where v_i = random_vector(d, bit_seed(seed, i)) and t_i
/// the threshold of A·v_i. One pass over `rows` per bit; working memory is
/// one length-d direction and one length-n projection.
CodeMatrix encode(RowSource& rows, const EncoderConfig& cfg);

/// Same result as encode(CsrRowSource(a), cfg), bits split across `threads`
/// workers. Output does not depend on the thread count.
CodeMatrix encode(const CsrMatrix& a, const EncoderConfig& cfg, unsigned threads = 1);

/// Baseline codes: every element uniform in [0, c), seeded by cfg.seed.
/// Collisions are kept.
CodeMatrix random_codes(std::size_t n, const EncoderConfig& cfg);

/// n minus the number of distinct rows.
std::size_t count_collisions(const CodeMatrix& codes);

struct CollisionTrial {
  std::size_t trial = 0;
  std::size_t median_collisions = 0;
  std::size_t zero_collisions = 0;

  bool operator==(const CollisionTrial&) const = default;
};

/// For each trial, encodes `rows` with n_bit one-bit elements under both the
/// median and the zero threshold using the same per-trial projection
/// directions, and counts collisions for each.
std::vector<CollisionTrial> collision_experiment(RowSource& rows, std::size_t n_bit,
                                                 std::size_t trials, std::uint64_t seed);

/// Per-trial sub-seed used by collision_experiment.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

/// CSV with header "trial,median_collisions,zero_collisions".
void write_collision_csv(std::ostream& out, std::span<const CollisionTrial> table);

}  // namespace hashemb

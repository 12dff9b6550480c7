#include "hashemb/encoder.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>

#include "hashemb/errors.hpp"
#include "hashemb/rng.hpp"

namespace hashemb {

void EncoderConfig::validate() const {
  (void)bits_per_element(c);
  if (m < 1) throw domain_error("code length m must be at least 1");
}

std::uint64_t bit_seed(std::uint64_t master_seed, std::size_t bit_index) {
  return derive_seed(master_seed, bit_index);
}

std::vector<double> random_vector(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw domain_error("random_vector: dimension must be at least 1");
  Rng rng(seed);
  std::vector<double> v(d);
  for (auto& x : v) x = rng.normal();
  return v;
}

double select_threshold(std::span<const double> u, ThresholdMode mode) {
  if (u.empty()) throw domain_error("select_threshold: empty projection vector");
  switch (mode) {
    case ThresholdMode::zero:
      return 0.0;
    case ThresholdMode::median: {
      std::vector<double> scratch(u.begin(), u.end());
      const auto mid = scratch.begin() + static_cast<std::ptrdiff_t>((scratch.size() - 1) / 2);
      std::nth_element(scratch.begin(), mid, scratch.end());
      return *mid;
    }
    case ThresholdMode::random_baseline:
      break;
  }
  throw domain_error("select_threshold: random baseline has no threshold");
}

namespace {

// Fills u = A·v for one pass over `rows`.
void project(RowSource& rows, std::span<const double> v, std::span<double> u) {
  std::size_t expected = 0;
  rows.scan([&](std::size_t j, const SparseRow& row) {
    if (j != expected) throw shape_error("encode: rows must arrive in ascending order");
    if (j >= u.size()) throw shape_error("encode: source yielded more rows than declared");
    if (!row.cols.empty() && row.cols.back() >= v.size()) {
      throw shape_error("encode: row " + std::to_string(j) + " is wider than " +
                        std::to_string(v.size()) + " columns");
    }
    u[j] = row_dot(row, v);
    ++expected;
  });
  if (expected != u.size()) throw shape_error("encode: source yielded fewer rows than declared");
}

void set_bits(CodeMatrix& out, std::size_t bit, std::span<const double> u, double t) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] > t) out.set_bit(j, bit, true);
  }
}

}  // namespace

CodeMatrix encode(RowSource& rows, const EncoderConfig& cfg) {
  cfg.validate();
  if (cfg.threshold == ThresholdMode::random_baseline) {
    throw config_error("encode: use random_codes for the random baseline");
  }
  const std::size_t n = rows.n_rows();
  const std::size_t d = rows.n_cols();
  CodeMatrix out(n, cfg.c, cfg.m, cfg.seed, cfg.threshold);
  if (n == 0) return out;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < cfg.n_bit(); ++i) {
    const auto v = random_vector(d, bit_seed(cfg.seed, i));
    project(rows, v, u);
    set_bits(out, i, u, select_threshold(u, cfg.threshold));
  }
  return out;
}

CodeMatrix encode(const CsrMatrix& a, const EncoderConfig& cfg, unsigned threads) {
  cfg.validate();
  if (cfg.threshold == ThresholdMode::random_baseline) {
    throw config_error("encode: use random_codes for the random baseline");
  }
  const std::size_t n = a.n_rows();
  const std::size_t n_bit = cfg.n_bit();
  CodeMatrix out(n, cfg.c, cfg.m, cfg.seed, cfg.threshold);
  if (n == 0) return out;
  threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(n_bit));

  // Workers write disjoint bit columns, but columns share bytes, so each
  // worker records thresholded columns and the merge happens serially.
  std::vector<std::vector<char>> columns(n_bit);
  const auto worker = [&](unsigned w) {
    std::vector<double> u(n);
    for (std::size_t i = w; i < n_bit; i += threads) {
      const auto v = random_vector(a.n_cols(), bit_seed(cfg.seed, i));
      for (std::size_t j = 0; j < n; ++j) u[j] = row_dot(a.row(j), v);
      const double t = select_threshold(u, cfg.threshold);
      auto& col = columns[i];
      col.resize(n);
      for (std::size_t j = 0; j < n; ++j) col[j] = u[j] > t;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  for (std::size_t i = 0; i < n_bit; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (columns[i][j]) out.set_bit(j, i, true);
    }
  }
  return out;
}

CodeMatrix random_codes(std::size_t n, const EncoderConfig& cfg) {
  cfg.validate();
  CodeMatrix out(n, cfg.c, cfg.m, cfg.seed, ThresholdMode::random_baseline);
  Rng rng(cfg.seed);
  std::vector<std::uint32_t> code(cfg.m);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& e : code) e = static_cast<std::uint32_t>(rng.below(cfg.c));
    out.set_code(i, code);
  }
  return out;
}

std::size_t count_collisions(const CodeMatrix& codes) {
  std::unordered_set<std::string_view> distinct;
  distinct.reserve(codes.n());
  const auto bytes = codes.bytes();
  const auto width = codes.row_bytes();
  for (std::size_t i = 0; i < codes.n(); ++i) {
    distinct.emplace(reinterpret_cast<const char*>(bytes.data() + i * width), width);
  }
  return codes.n() - distinct.size();
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(master_seed ^ 0xc0111510ULL, trial);
}

std::vector<CollisionTrial> collision_experiment(RowSource& rows, std::size_t n_bit,
                                                 std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw domain_error("collision_experiment: trials must be >= 1");
  if (n_bit < 1 || n_bit > std::numeric_limits<std::uint32_t>::max()) {
    throw domain_error("collision_experiment: n_bit must be >= 1");
  }
  const std::size_t n = rows.n_rows();
  const std::size_t d = rows.n_cols();
  const auto m = static_cast<std::uint32_t>(n_bit);
  std::vector<CollisionTrial> table;
  table.reserve(trials);
  std::vector<double> u(n);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto sub = trial_seed(seed, k);
    // Both thresholds binarize the same projections, which is exactly what
    // two encode() calls with this sub-seed would compute.
    CodeMatrix median_codes(n, 2, m, sub, ThresholdMode::median);
    CodeMatrix zero_codes(n, 2, m, sub, ThresholdMode::zero);
    if (n > 0) {
      for (std::size_t i = 0; i < n_bit; ++i) {
        const auto v = random_vector(d, bit_seed(sub, i));
        project(rows, v, u);
        set_bits(median_codes, i, u, select_threshold(u, ThresholdMode::median));
        set_bits(zero_codes, i, u, 0.0);
      }
    }
    table.push_back({k, count_collisions(median_codes), count_collisions(zero_codes)});
  }
  return table;
}

void write_collision_csv(std::ostream& out, std::span<const CollisionTrial> table) {
  out << "trial,median_collisions,zero_collisions\n";
  for (const auto& row : table) {
    out << row.trial << ',' << row.median_collisions << ',' << row.zero_collisions << '\n';
  }
}

}  // namespace hashemb

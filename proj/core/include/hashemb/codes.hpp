#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hashemb {

/// How a code matrix was produced. Stored in the GECC header.
enum class ThresholdMode : std::uint8_t { zero = 0, median = 1, random_baseline = 2 };

std::string to_string(ThresholdMode mode);
ThresholdMode parse_threshold_mode(const std::string& text);

/// log2(c) for a power-of-two c >= 2; domain_error otherwise.
std::uint32_t bits_per_element(std::uint32_t c);

/// m·log2(c): bits needed for one compositional code.
std::size_t code_bits(std::uint32_t c, std::uint32_t m);

/// Bytes per packed row, ⌈m·log2(c)/8⌉.
std::size_t code_row_bytes(std::uint32_t c, std::uint32_t m);

/// Packs integer code elements MSB-first, log2(c) bits each, into
/// ⌈m·log2(c)/8⌉ bytes. Pad bits are zero.
std::vector<std::uint8_t> pack_code(std::span<const std::uint32_t> code, std::uint32_t c);

/// Inverse of pack_code. `row` must hold at least m·log2(c) bits.
std::vector<std::uint32_t> unpack_code(std::span<const std::uint8_t> row, std::uint32_t c,
                                       std::uint32_t m);

/// Bit-packed compositional codes for n entities. Bit i of a row is the
/// i-th bit of the MSB-first concatenation, so element j spans bits
/// [j·log2(c), (j+1)·log2(c)).
class CodeMatrix {
 public:
  CodeMatrix() = default;
  /// All-false matrix.
  CodeMatrix(std::size_t n, std::uint32_t c, std::uint32_t m, std::uint64_t seed = 0,
             ThresholdMode mode = ThresholdMode::median);
  /// Adopts packed rows; pad bits must be zero.
  CodeMatrix(std::size_t n, std::uint32_t c, std::uint32_t m, std::uint64_t seed,
             ThresholdMode mode, std::vector<std::uint8_t> bytes);

  std::size_t n() const { return n_; }
  std::uint32_t c() const { return c_; }
  std::uint32_t m() const { return m_; }
  std::uint64_t seed() const { return seed_; }
  ThresholdMode mode() const { return mode_; }
  std::size_t n_bit() const { return n_bit_; }
  std::size_t row_bytes() const { return row_bytes_; }

  std::span<const std::uint8_t> row(std::size_t i) const;
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  bool bit(std::size_t i, std::size_t b) const {
    return (bytes_[i * row_bytes_ + b / 8] >> (7 - b % 8)) & 1u;
  }
  void set_bit(std::size_t i, std::size_t b, bool value);

  /// Integer code of row i.
  std::vector<std::uint32_t> code(std::size_t i) const;
  /// Writes the integer code of row i into `out` (size m).
  void code_into(std::size_t i, std::span<std::uint32_t> out) const;

  void set_code(std::size_t i, std::span<const std::uint32_t> code);

  bool operator==(const CodeMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::uint32_t c_ = 2;
  std::uint32_t m_ = 1;
  std::uint64_t seed_ = 0;
  ThresholdMode mode_ = ThresholdMode::median;
  std::size_t n_bit_ = 0;
  std::size_t row_bytes_ = 0;
  std::vector<std::uint8_t> bytes_;
};

// GECC layout (little-endian), 40-byte header then packed rows:
//   "GECC" | version u32 = 1 | n u64 | c u32 | m u32 | seed u64 |
//   threshold_mode u8 | 7 zero bytes | n × ⌈m·log2(c)/8⌉ bytes
inline constexpr std::uint32_t kCodeFileVersion = 1;
inline constexpr std::size_t kCodeHeaderBytes = 40;

void write_codes(std::ostream& out, const CodeMatrix& codes);
void write_codes(const std::filesystem::path& path, const CodeMatrix& codes);
/// Throws format_error (naming the byte offset) on bad magic, unsupported
/// version, bad header fields or truncation. Never returns a partial matrix.
CodeMatrix read_codes(std::istream& in);
CodeMatrix read_codes(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Memory accounting

enum class DecoderVariant { light, full };

std::string to_string(DecoderVariant v);
DecoderVariant parse_decoder_variant(const std::string& text);

struct MemorySpec {
  std::uint64_t n = 1;
  std::uint64_t d_e = 64;
  std::uint32_t f = 32;  // bits per float: 16, 32 or 64
  std::uint32_t c = 256;
  std::uint32_t m = 16;
  std::uint64_t d_c = 512;
  std::uint64_t d_m = 512;
  std::uint64_t l = 3;
  DecoderVariant variant = DecoderVariant::light;
  /// Parameters of the downstream model resident next to the embeddings
  /// (the "GNN" column); counted on both sides of every ratio.
  std::uint64_t downstream_params = 0;
  /// Count one bias per MLP output unit. Off by default: the closed-form
  /// counts have no bias terms.
  bool include_biases = false;

  void validate() const;
};

/// Trainable decoder scalars under the closed form:
///   light: d_c + d_c·d_m + (l−2)·d_m² + d_m·d_e
///   full:  m·c·d_c + d_c·d_m + (l−2)·d_m² + d_m·d_e
std::uint64_t decoder_trainable_params(const MemorySpec& spec);
/// m·c·d_c for light (frozen codebooks), 0 for full.
std::uint64_t decoder_nontrainable_params(const MemorySpec& spec);

struct MemoryReport {
  double raw_embedding_bytes = 0;   // n·d_e·f/8
  double code_bytes = 0;            // n·m·log2(c)/8
  std::uint64_t decoder_trainable_params = 0;
  std::uint64_t decoder_nontrainable_params = 0;
  double decoder_bytes = 0;         // trainable + non-trainable
  double decoder_trainable_bytes = 0;
  double decoder_nontrainable_bytes = 0;
  double downstream_bytes = 0;

  // GPU side: raw embeddings vs trainable decoder, each plus the downstream model.
  double gpu_raw_bytes = 0;
  double gpu_compressed_bytes = 0;
  double gpu_ratio = 0;
  // CPU + GPU.
  double total_raw_bytes = 0;
  double total_compressed_bytes = 0;
  double total_ratio = 0;
};

MemoryReport memory_report(const MemorySpec& spec);

/// raw / compressed. domain_error when compressed <= 0.
double compression_ratio(double raw, double compressed);

inline constexpr double kMiB = 1024.0 * 1024.0;

/// Bytes as MiB rounded half-away-from-zero to two decimals, e.g. "456.79".
std::string format_mib(double bytes);
/// Ratio truncated toward zero at two decimals, e.g. "43.75".
std::string format_ratio(double ratio);
/// Two-decimal value of a ratio as printed by format_ratio.
double truncate2(double value);

/// Table-style rendering of a report (raw row plus hashed row).
std::string render_memory_table(const MemorySpec& spec, const MemoryReport& report);

}  // namespace hashemb

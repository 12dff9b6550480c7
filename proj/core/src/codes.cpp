#include "hashemb/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "hashemb/binary_io.hpp"
#include "hashemb/errors.hpp"

namespace hashemb {

std::string to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::zero: return "zero";
    case ThresholdMode::median: return "median";
    case ThresholdMode::random_baseline: return "random";
  }
  return "unknown";
}

ThresholdMode parse_threshold_mode(const std::string& text) {
  if (text == "zero") return ThresholdMode::zero;
  if (text == "median") return ThresholdMode::median;
  if (text == "random") return ThresholdMode::random_baseline;
  throw config_error("threshold must be one of median, zero, random (got '" + text + "')");
}

std::uint32_t bits_per_element(std::uint32_t c) {
  if (c < 2 || !std::has_single_bit(c)) {
    throw domain_error("c must be a power of 2 (got " + std::to_string(c) + ")");
  }
  return static_cast<std::uint32_t>(std::countr_zero(c));
}

std::size_t code_bits(std::uint32_t c, std::uint32_t m) {
  return static_cast<std::size_t>(m) * bits_per_element(c);
}

std::size_t code_row_bytes(std::uint32_t c, std::uint32_t m) {
  return (code_bits(c, m) + 7) / 8;
}

namespace {

void write_element(std::span<std::uint8_t> row, std::size_t first_bit, std::uint32_t width,
                   std::uint32_t value) {
  for (std::uint32_t k = 0; k < width; ++k) {
    if ((value >> (width - 1 - k)) & 1u) {
      const std::size_t b = first_bit + k;
      row[b / 8] |= static_cast<std::uint8_t>(0x80u >> (b % 8));
    }
  }
}

std::uint32_t read_element(std::span<const std::uint8_t> row, std::size_t first_bit,
                           std::uint32_t width) {
  std::uint32_t value = 0;
  for (std::uint32_t k = 0; k < width; ++k) {
    const std::size_t b = first_bit + k;
    value = (value << 1) | ((row[b / 8] >> (7 - b % 8)) & 1u);
  }
  return value;
}

}  // namespace

std::vector<std::uint8_t> pack_code(std::span<const std::uint32_t> code, std::uint32_t c) {
  const auto width = bits_per_element(c);
  std::vector<std::uint8_t> row((code.size() * width + 7) / 8, 0);
  for (std::size_t j = 0; j < code.size(); ++j) {
    if (code[j] >= c) {
      throw range_error("pack_code: element " + std::to_string(j) + " = " +
                        std::to_string(code[j]) + " is not below c = " + std::to_string(c));
    }
    write_element(row, j * width, width, code[j]);
  }
  return row;
}

std::vector<std::uint32_t> unpack_code(std::span<const std::uint8_t> row, std::uint32_t c,
                                       std::uint32_t m) {
  const auto width = bits_per_element(c);
  if (row.size() * 8 < static_cast<std::size_t>(m) * width) {
    throw shape_error("unpack_code: row has " + std::to_string(row.size() * 8) +
                      " bits, need " + std::to_string(static_cast<std::size_t>(m) * width));
  }
  std::vector<std::uint32_t> code(m);
  for (std::uint32_t j = 0; j < m; ++j) code[j] = read_element(row, j * width, width);
  return code;
}

CodeMatrix::CodeMatrix(std::size_t n, std::uint32_t c, std::uint32_t m, std::uint64_t seed,
                       ThresholdMode mode)
    : n_(n), c_(c), m_(m), seed_(seed), mode_(mode) {
  if (m == 0) throw domain_error("code length m must be at least 1");
  n_bit_ = code_bits(c, m);
  row_bytes_ = (n_bit_ + 7) / 8;
  bytes_.assign(n_ * row_bytes_, 0);
}

CodeMatrix::CodeMatrix(std::size_t n, std::uint32_t c, std::uint32_t m, std::uint64_t seed,
                       ThresholdMode mode, std::vector<std::uint8_t> bytes)
    : CodeMatrix(n, c, m, seed, mode) {
  if (bytes.size() != bytes_.size()) {
    throw shape_error("CodeMatrix: expected " + std::to_string(bytes_.size()) +
                      " packed bytes, got " + std::to_string(bytes.size()));
  }
  bytes_ = std::move(bytes);
  const std::size_t pad = row_bytes_ * 8 - n_bit_;
  if (pad > 0) {
    const auto mask = static_cast<std::uint8_t>((1u << pad) - 1u);
    for (std::size_t i = 0; i < n_; ++i) {
      if (bytes_[i * row_bytes_ + row_bytes_ - 1] & mask) {
        throw format_error("CodeMatrix: non-zero pad bits in row " + std::to_string(i));
      }
    }
  }
}

std::span<const std::uint8_t> CodeMatrix::row(std::size_t i) const {
  if (i >= n_) throw range_error("CodeMatrix::row: index " + std::to_string(i) + " >= n");
  return std::span(bytes_).subspan(i * row_bytes_, row_bytes_);
}

void CodeMatrix::set_bit(std::size_t i, std::size_t b, bool value) {
  auto& byte = bytes_[i * row_bytes_ + b / 8];
  const auto mask = static_cast<std::uint8_t>(0x80u >> (b % 8));
  byte = value ? static_cast<std::uint8_t>(byte | mask)
               : static_cast<std::uint8_t>(byte & ~mask);
}

std::vector<std::uint32_t> CodeMatrix::code(std::size_t i) const {
  std::vector<std::uint32_t> out(m_);
  code_into(i, out);
  return out;
}

void CodeMatrix::code_into(std::size_t i, std::span<std::uint32_t> out) const {
  const auto r = row(i);
  const auto width = static_cast<std::uint32_t>(n_bit_ / m_);
  for (std::uint32_t j = 0; j < m_; ++j) out[j] = read_element(r, j * width, width);
}

void CodeMatrix::set_code(std::size_t i, std::span<const std::uint32_t> code) {
  if (i >= n_) throw range_error("CodeMatrix::set_code: index out of range");
  if (code.size() != m_) throw shape_error("CodeMatrix::set_code: code length != m");
  const auto packed = pack_code(code, c_);
  std::copy(packed.begin(), packed.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(i * row_bytes_));
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kCodeMagic[4] = {'G', 'E', 'C', 'C'};
}

void write_codes(std::ostream& out, const CodeMatrix& codes) {
  out.write(kCodeMagic, 4);
  detail::put_le<std::uint32_t>(out, kCodeFileVersion);
  detail::put_le<std::uint64_t>(out, codes.n());
  detail::put_le<std::uint32_t>(out, codes.c());
  detail::put_le<std::uint32_t>(out, codes.m());
  detail::put_le<std::uint64_t>(out, codes.seed());
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(codes.mode()));
  const char reserved[7] = {};
  out.write(reserved, sizeof(reserved));
  const auto payload = codes.bytes();
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw format_error("write_codes: stream write failed");
}

void write_codes(const std::filesystem::path& path, const CodeMatrix& codes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error("cannot open " + path.string() + " for writing");
  write_codes(out, codes);
}

CodeMatrix read_codes(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw format_error("truncated GECC header at offset 0");
  if (std::string_view(magic, 4) != std::string_view(kCodeMagic, 4)) {
    throw format_error("bad GECC magic at offset 0");
  }
  const auto version = detail::get_le<std::uint32_t>(in, "version");
  if (version != kCodeFileVersion) {
    throw format_error("unsupported GECC version " + std::to_string(version) +
                       " at offset 4");
  }
  const auto n = detail::get_le<std::uint64_t>(in, "n");
  const auto c = detail::get_le<std::uint32_t>(in, "c");
  const auto m = detail::get_le<std::uint32_t>(in, "m");
  const auto seed = detail::get_le<std::uint64_t>(in, "seed");
  const auto mode = detail::get_le<std::uint8_t>(in, "threshold_mode");
  char reserved[7];
  if (!in.read(reserved, 7)) throw format_error("truncated GECC header at offset 33");
  if (c < 2 || !std::has_single_bit(c) || m == 0) {
    throw format_error("invalid GECC (c, m) at offset 16");
  }
  if (mode > 2) throw format_error("invalid GECC threshold_mode at offset 32");
  for (char r : reserved) {
    if (r != 0) throw format_error("non-zero GECC reserved bytes at offset 33");
  }
  const std::size_t row_bytes = code_row_bytes(c, m);
  if (n > std::numeric_limits<std::size_t>::max() / row_bytes) {
    throw format_error("GECC row count at offset 8 overflows the payload size");
  }
  const std::size_t want = n * row_bytes;
  // Grow in chunks so a corrupt row count fails on truncation rather than on
  // one huge allocation.
  constexpr std::size_t kChunk = std::size_t{1} << 24;
  std::vector<std::uint8_t> payload;
  while (payload.size() < want) {
    const std::size_t have = payload.size();
    const std::size_t step = std::min(kChunk, want - have);
    payload.resize(have + step);
    in.read(reinterpret_cast<char*>(payload.data() + have), static_cast<std::streamsize>(step));
    if (static_cast<std::size_t>(in.gcount()) != step) {
      throw format_error("truncated GECC payload: expected " + std::to_string(want) +
                         " bytes at offset " + std::to_string(kCodeHeaderBytes) + ", got " +
                         std::to_string(have + static_cast<std::size_t>(in.gcount())));
    }
  }
  return {n, c, m, seed, static_cast<ThresholdMode>(mode), std::move(payload)};
}

CodeMatrix read_codes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return read_codes(in);
}

// ---------------------------------------------------------------------------

std::string to_string(DecoderVariant v) {
  return v == DecoderVariant::light ? "light" : "full";
}

DecoderVariant parse_decoder_variant(const std::string& text) {
  if (text == "light") return DecoderVariant::light;
  if (text == "full") return DecoderVariant::full;
  throw config_error("variant must be light or full (got '" + text + "')");
}

void MemorySpec::validate() const {
  if (f != 16 && f != 32 && f != 64) throw domain_error("f must be 16, 32 or 64");
  if (n < 1 || d_e < 1 || m < 1 || d_c < 1 || d_m < 1) {
    throw domain_error("memory spec counts must be >= 1");
  }
  if (l < 2) throw domain_error("decoder layer count l must be >= 2");
  (void)bits_per_element(c);
}

std::uint64_t decoder_trainable_params(const MemorySpec& s) {
  s.validate();
  std::uint64_t count = s.d_c * s.d_m + (s.l - 2) * s.d_m * s.d_m + s.d_m * s.d_e;
  count += s.variant == DecoderVariant::light
               ? s.d_c
               : static_cast<std::uint64_t>(s.m) * s.c * s.d_c;
  if (s.include_biases) count += (s.l - 1) * s.d_m + s.d_e;
  return count;
}

std::uint64_t decoder_nontrainable_params(const MemorySpec& s) {
  s.validate();
  return s.variant == DecoderVariant::light
             ? static_cast<std::uint64_t>(s.m) * s.c * s.d_c
             : 0;
}

double compression_ratio(double raw, double compressed) {
  if (!(compressed > 0.0)) throw domain_error("compression_ratio: compressed size must be > 0");
  return raw / compressed;
}

MemoryReport memory_report(const MemorySpec& s) {
  s.validate();
  MemoryReport r;
  const double bytes_per_float = s.f / 8.0;
  r.raw_embedding_bytes = static_cast<double>(s.n) * static_cast<double>(s.d_e) * bytes_per_float;
  r.code_bytes = static_cast<double>(s.n) * static_cast<double>(code_bits(s.c, s.m)) / 8.0;
  r.decoder_trainable_params = decoder_trainable_params(s);
  r.decoder_nontrainable_params = decoder_nontrainable_params(s);
  r.decoder_trainable_bytes = static_cast<double>(r.decoder_trainable_params) * bytes_per_float;
  r.decoder_nontrainable_bytes =
      static_cast<double>(r.decoder_nontrainable_params) * bytes_per_float;
  r.decoder_bytes = r.decoder_trainable_bytes + r.decoder_nontrainable_bytes;
  r.downstream_bytes = static_cast<double>(s.downstream_params) * bytes_per_float;

  r.gpu_raw_bytes = r.raw_embedding_bytes + r.downstream_bytes;
  r.gpu_compressed_bytes = r.decoder_trainable_bytes + r.downstream_bytes;
  r.gpu_ratio = compression_ratio(r.gpu_raw_bytes, r.gpu_compressed_bytes);
  r.total_raw_bytes = r.gpu_raw_bytes;
  r.total_compressed_bytes = r.code_bytes + r.decoder_bytes + r.downstream_bytes;
  r.total_ratio = compression_ratio(r.total_raw_bytes, r.total_compressed_bytes);
  return r;
}

std::string format_mib(double bytes) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", bytes / kMiB);
  return buf;
}

double truncate2(double value) {
  // The 1e-9 nudge keeps exact two-decimal values (e.g. 1.00) from
  // flooring one step down through representation error.
  return std::floor(value * 100.0 + 1e-9) / 100.0;
}

std::string format_ratio(double ratio) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", truncate2(ratio));
  return buf;
}

std::string render_memory_table(const MemorySpec& spec, const MemoryReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s | %11s %8s %8s | %11s %8s %8s %8s | %8s %8s\n",
                "method", "binary_code", "decoder", "total", "dec_or_emb", "model", "total",
                "ratio", "total", "ratio");
  out << "# memory (MiB, 1 MiB = 1024^2 bytes); CPU | GPU | CPU+GPU\n" << line;
  const auto row = [&](const std::string& name, double code, double cpu_dec, double gpu_dec,
                       double model, double gpu_ratio, double total_ratio) {
    const double cpu_total = code + cpu_dec;
    const double gpu_total = gpu_dec + model;
    std::snprintf(line, sizeof(line), "%-12s | %11s %8s %8s | %11s %8s %8s %8s | %8s %8s\n",
                  name.c_str(), format_mib(code).c_str(), format_mib(cpu_dec).c_str(),
                  format_mib(cpu_total).c_str(), format_mib(gpu_dec).c_str(),
                  format_mib(model).c_str(), format_mib(gpu_total).c_str(),
                  format_ratio(gpu_ratio).c_str(), format_mib(cpu_total + gpu_total).c_str(),
                  format_ratio(total_ratio).c_str());
    out << line;
  };
  row("raw", 0.0, 0.0, r.raw_embedding_bytes, r.downstream_bytes, 1.0, 1.0);
  row("hash-" + to_string(spec.variant), r.code_bytes, r.decoder_nontrainable_bytes,
      r.decoder_trainable_bytes, r.downstream_bytes, r.gpu_ratio, r.total_ratio);
  return out.str();
}

}  // namespace hashemb

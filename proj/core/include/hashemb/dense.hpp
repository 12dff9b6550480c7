#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace hashemb {

/// Row-major float32 matrix; the in-memory form of a GEF32 file.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  DenseMatrix(std::size_t r, std::size_t c, std::vector<float> values);

  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  float& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  float operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const DenseMatrix&) const = default;
};

// GEF32 layout (little-endian):
//   magic "GEF32" (5 bytes) | rows u64 | cols u32 | rows*cols binary32
inline constexpr std::size_t kDenseHeaderBytes = 5 + 8 + 4;

struct DenseHeader {
  std::uint64_t rows = 0;
  std::uint32_t cols = 0;
};

void write_dense(std::ostream& out, const DenseMatrix& m);
void write_dense(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_dense(std::istream& in);
DenseMatrix read_dense(const std::filesystem::path& path);

/// Reads and validates only the header; leaves `in` positioned at the first
/// payload byte.
DenseHeader read_dense_header(std::istream& in);

}  // namespace hashemb

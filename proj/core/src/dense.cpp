#include "hashemb/dense.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <string>

#include "hashemb/binary_io.hpp"
#include "hashemb/errors.hpp"

namespace hashemb {

namespace {
constexpr char kMagic[5] = {'G', 'E', 'F', '3', '2'};
}

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c, std::vector<float> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw shape_error("DenseMatrix: " + std::to_string(data.size()) +
                      " values for a " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " matrix");
  }
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
  out.write(kMagic, sizeof(kMagic));
  detail::put_le<std::uint64_t>(out, m.rows);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(float)));
  } else {
    for (float v : m.data) detail::put_le<float>(out, v);
  }
  if (!out) throw format_error("write_dense: stream write failed");
}

void write_dense(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error("cannot open " + path.string() + " for writing");
  write_dense(out, m);
}

DenseHeader read_dense_header(std::istream& in) {
  char magic[5];
  if (!in.read(magic, sizeof(magic))) {
    throw format_error("truncated GEF32 header at offset 0");
  }
  if (std::string(magic, 5) != std::string(kMagic, 5)) {
    throw format_error("bad GEF32 magic at offset 0");
  }
  DenseHeader h;
  h.rows = detail::get_le<std::uint64_t>(in, "rows");
  h.cols = detail::get_le<std::uint32_t>(in, "cols");
  return h;
}

DenseMatrix read_dense(std::istream& in) {
  const DenseHeader h = read_dense_header(in);
  if (h.cols != 0 && h.rows > std::numeric_limits<std::size_t>::max() / sizeof(float) / h.cols) {
    throw format_error("GEF32 row count at offset 5 overflows the payload size");
  }
  const std::size_t total = h.rows * h.cols;
  // Read a block of rows at a time so a corrupt header fails on truncation
  // rather than on one huge allocation.
  constexpr std::size_t kChunk = std::size_t{1} << 22;
  std::vector<float> data;
  while (data.size() < total) {
    const std::size_t have = data.size();
    const std::size_t step = std::min(kChunk, total - have);
    data.resize(have + step);
    if constexpr (std::endian::native == std::endian::little) {
      const auto bytes = static_cast<std::streamsize>(step * sizeof(float));
      in.read(reinterpret_cast<char*>(data.data() + have), bytes);
      if (in.gcount() != bytes) {
        throw format_error("truncated GEF32 payload: expected " +
                           std::to_string(total * sizeof(float)) + " bytes at offset " +
                           std::to_string(kDenseHeaderBytes) + ", got " +
                           std::to_string(have * sizeof(float) +
                                          static_cast<std::size_t>(in.gcount())));
      }
    } else {
      for (std::size_t i = have; i < have + step; ++i) {
        data[i] = detail::get_le<float>(in, "matrix payload");
      }
    }
  }
  return {h.rows, h.cols, std::move(data)};
}

DenseMatrix read_dense(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return read_dense(in);
}

}  // namespace hashemb

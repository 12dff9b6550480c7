#include "hashemb/sparse.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>

#include "hashemb/errors.hpp"

namespace hashemb {

CsrMatrix::CsrMatrix(std::size_t n_rows, std::size_t n_cols,
                     std::vector<std::size_t> row_ptr,
                     std::vector<std::uint32_t> col_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != n_rows_ + 1) {
    throw shape_error("CsrMatrix: row_ptr must have n_rows + 1 entries");
  }
  if (row_ptr_.front() != 0) throw shape_error("CsrMatrix: row_ptr[0] must be 0");
  if (row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
    throw shape_error("CsrMatrix: row_ptr[n_rows], col_idx and values disagree");
  }
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) {
      throw shape_error("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
    }
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= n_cols_) {
        throw range_error("CsrMatrix: column " + std::to_string(col_idx_[k]) +
                          " out of range in row " + std::to_string(i));
      }
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
        throw shape_error("CsrMatrix: columns not strictly increasing in row " +
                          std::to_string(i));
      }
    }
  }
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& m) {
  std::vector<std::size_t> row_ptr(m.rows + 1);
  std::vector<std::uint32_t> col_idx(m.rows * m.cols);
  std::vector<double> values(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    row_ptr[i + 1] = (i + 1) * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) {
      col_idx[i * m.cols + j] = static_cast<std::uint32_t>(j);
      values[i * m.cols + j] = m(i, j);
    }
  }
  return {m.rows, m.cols, std::move(row_ptr), std::move(col_idx), std::move(values)};
}

SparseRow CsrMatrix::row(std::size_t i) const {
  if (i >= n_rows_) throw range_error("CsrMatrix::row: index out of range");
  const auto begin = row_ptr_[i];
  const auto len = row_ptr_[i + 1] - begin;
  return {std::span(col_idx_).subspan(begin, len), std::span(values_).subspan(begin, len)};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> CsrMatrix::coordinates() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      out.emplace_back(static_cast<std::uint32_t>(i), col_idx_[k]);
    }
  }
  return out;
}

double row_dot(const SparseRow& row, std::span<const double> v) {
  double sum = 0.0;
  for (std::size_t k = 0; k < row.cols.size(); ++k) {
    const auto col = row.cols[k];
    if (col >= v.size()) {
      throw range_error("row_dot: column " + std::to_string(col) +
                        " outside vector of length " + std::to_string(v.size()));
    }
    sum += row.values[k] * v[col];
  }
  return sum;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char ch) {
    return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Parses one unsigned id token, advancing `s` past it.
std::uint64_t take_id(std::string_view& s, std::size_t line_no) {
  s = trim(s);
  std::uint64_t value = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw range_error("edge list line " + std::to_string(line_no) + ": node id overflow");
  }
  if (ec != std::errc{} || (ptr != last && *ptr != ' ' && *ptr != '\t')) {
    throw parse_error("edge list line " + std::to_string(line_no) +
                      ": expected two non-negative integers");
  }
  s.remove_prefix(static_cast<std::size_t>(ptr - first));
  return value;
}

}  // namespace

CsrMatrix load_edge_list(std::istream& in, bool symmetrize,
                         std::optional<std::size_t> num_nodes) {
  constexpr std::uint64_t kMaxId = std::numeric_limits<std::uint32_t>::max() - 1;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t max_id = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty() || rest.front() == '#') continue;
    const auto u = take_id(rest, line_no);
    const auto v = take_id(rest, line_no);
    if (!trim(rest).empty()) {
      throw parse_error("edge list line " + std::to_string(line_no) +
                        ": trailing content after two ids");
    }
    if (u > kMaxId || v > kMaxId) {
      throw range_error("edge list line " + std::to_string(line_no) + ": node id overflow");
    }
    if (num_nodes && (u >= *num_nodes || v >= *num_nodes)) {
      throw range_error("edge list line " + std::to_string(line_no) + ": node id " +
                        std::to_string(std::max(u, v)) + " >= declared node count " +
                        std::to_string(*num_nodes));
    }
    max_id = std::max({max_id, u, v});
    any = true;
    edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    if (symmetrize && u != v) {
      edges.emplace_back(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u));
    }
  }
  const std::size_t n = num_nodes ? *num_nodes : (any ? max_id + 1 : 0);

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::uint32_t> col_idx;
  col_idx.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    ++row_ptr[u + 1];
    col_idx.push_back(v);
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<double> values(col_idx.size(), 1.0);
  return {n, n, std::move(row_ptr), std::move(col_idx), std::move(values)};
}

CsrMatrix load_edge_list(const std::filesystem::path& path, bool symmetrize,
                         std::optional<std::size_t> num_nodes) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open edge list " + path.string());
  return load_edge_list(in, symmetrize, num_nodes);
}

void CsrRowSource::scan(const Visitor& visit) {
  for (std::size_t i = 0; i < matrix_->n_rows(); ++i) visit(i, matrix_->row(i));
}

DenseRowSource::DenseRowSource(const DenseMatrix& m)
    : matrix_(&m), cols_(m.cols), buffer_(m.cols) {
  std::iota(cols_.begin(), cols_.end(), 0u);
}

void DenseRowSource::scan(const Visitor& visit) {
  for (std::size_t i = 0; i < matrix_->rows; ++i) {
    const auto r = matrix_->row(i);
    std::copy(r.begin(), r.end(), buffer_.begin());
    visit(i, SparseRow{cols_, buffer_});
  }
}

DenseFileRowSource::DenseFileRowSource(std::filesystem::path path, std::size_t chunk_rows)
    : path_(std::move(path)), chunk_rows_(std::max<std::size_t>(chunk_rows, 1)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw format_error("cannot open " + path_.string());
  header_ = read_dense_header(in);
  cols_.resize(header_.cols);
  std::iota(cols_.begin(), cols_.end(), 0u);
  buffer_.resize(header_.cols);
}

void DenseFileRowSource::scan(const Visitor& visit) {
  static_assert(std::endian::native == std::endian::little,
                "DenseFileRowSource reads binary32 payloads in place");
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw format_error("cannot open " + path_.string());
  in.seekg(static_cast<std::streamoff>(kDenseHeaderBytes));
  const std::size_t cols = header_.cols;
  chunk_.resize(chunk_rows_ * cols);
  for (std::size_t start = 0; start < header_.rows; start += chunk_rows_) {
    const std::size_t count = std::min<std::size_t>(chunk_rows_, header_.rows - start);
    const auto bytes = static_cast<std::streamsize>(count * cols * sizeof(float));
    if (!in.read(reinterpret_cast<char*>(chunk_.data()), bytes)) {
      throw format_error("truncated GEF32 payload in " + path_.string() + " at row " +
                         std::to_string(start));
    }
    for (std::size_t r = 0; r < count; ++r) {
      const float* src = chunk_.data() + r * cols;
      std::copy(src, src + cols, buffer_.begin());
      visit(start + r, SparseRow{cols_, buffer_});
    }
  }
}

}  // namespace hashemb

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hashemb/dense.hpp"

namespace hashemb {

/// One row of a sparse matrix: parallel column-index / value views.
struct SparseRow {
  std::span<const std::uint32_t> cols;
  std::span<const double> values;

  std::size_t nnz() const { return cols.size(); }
};

/// Compressed sparse row matrix. Immutable after construction; the
/// constructor validates every structural invariant.
class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_{0} {}
  CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
            std::vector<std::uint32_t> col_idx, std::vector<double> values);

  /// Keeps every entry of the dense matrix, zeros included, so rows match
  /// what a dense streaming reader yields.
  static CsrMatrix from_dense(const DenseMatrix& m);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  SparseRow row(std::size_t i) const;

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Sorted (row, col) coordinates of the stored entries.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> coordinates() const;

  bool operator==(const CsrMatrix&) const = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

/// Σ values[k] · v[cols[k]]. Throws range_error if a column is outside v.
double row_dot(const SparseRow& row, std::span<const double> v);

/// Parses the edge-list text format: two non-negative integers per line,
/// '#' comment lines and blank lines skipped. Duplicate edges collapse to a
/// single 1.0 entry. The node count is max id + 1 unless `num_nodes` is
/// given, in which case ids must be below it.
CsrMatrix load_edge_list(std::istream& in, bool symmetrize,
                         std::optional<std::size_t> num_nodes = std::nullopt);
CsrMatrix load_edge_list(const std::filesystem::path& path, bool symmetrize,
                         std::optional<std::size_t> num_nodes = std::nullopt);

/// Row-wise provider of the auxiliary matrix. Each scan() is one full pass in
/// ascending row order; passes are repeatable and yield identical rows.
/// Instances are single-consumer.
class RowSource {
 public:
  using Visitor = std::function<void(std::size_t, const SparseRow&)>;

  virtual ~RowSource() = default;
  virtual std::size_t n_rows() const = 0;
  virtual std::size_t n_cols() const = 0;
  virtual void scan(const Visitor& visit) = 0;
};

/// View over an in-memory CsrMatrix. The matrix must outlive the source.
class CsrRowSource final : public RowSource {
 public:
  explicit CsrRowSource(const CsrMatrix& m) : matrix_(&m) {}
  std::size_t n_rows() const override { return matrix_->n_rows(); }
  std::size_t n_cols() const override { return matrix_->n_cols(); }
  void scan(const Visitor& visit) override;

 private:
  const CsrMatrix* matrix_;
};

/// View over an in-memory dense matrix; every column is reported per row.
class DenseRowSource final : public RowSource {
 public:
  explicit DenseRowSource(const DenseMatrix& m);
  std::size_t n_rows() const override { return matrix_->rows; }
  std::size_t n_cols() const override { return matrix_->cols; }
  void scan(const Visitor& visit) override;

 private:
  const DenseMatrix* matrix_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> buffer_;
};

/// Streams a GEF32 file a few rows at a time; only `chunk_rows` rows are
/// resident during a pass.
class DenseFileRowSource final : public RowSource {
 public:
  explicit DenseFileRowSource(std::filesystem::path path, std::size_t chunk_rows = 64);
  std::size_t n_rows() const override { return header_.rows; }
  std::size_t n_cols() const override { return header_.cols; }
  void scan(const Visitor& visit) override;

 private:
  std::filesystem::path path_;
  std::size_t chunk_rows_;
  DenseHeader header_;
  std::vector<std::uint32_t> cols_;
  std::vector<float> chunk_;
  std::vector<double> buffer_;
};

}  // namespace hashemb

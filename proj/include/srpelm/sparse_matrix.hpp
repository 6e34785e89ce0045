#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "srpelm/error.hpp"
#include "srpelm/parallel.hpp"

namespace srpelm {

/// Row-major dense real matrix; one sample per row.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Samples x features binary matrix in compressed-row form. Stored values are
/// implicitly 1. Immutable once constructed; every constructor validates that
/// column indices are in range and strictly increasing within a row.
class SparseBinaryMatrix {
 public:
  using index_type = std::uint32_t;

  SparseBinaryMatrix() : row_ptr_(1, 0) {}

  /// Builds from per-row index lists. Rows must already be strictly increasing;
  /// duplicates are rejected rather than merged.
  SparseBinaryMatrix(std::size_t n_cols, const std::vector<std::vector<index_type>>& rows)
      : n_cols_(n_cols) {
    row_ptr_.reserve(rows.size() + 1);
    row_ptr_.push_back(0);
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    cols_.reserve(total);
    for (const auto& r : rows) {
      cols_.insert(cols_.end(), r.begin(), r.end());
      row_ptr_.push_back(cols_.size());
    }
    validate();
  }

  /// Builds from raw CSR arrays (row_ptr has n_rows + 1 entries).
  SparseBinaryMatrix(std::size_t n_cols, std::vector<std::size_t> row_ptr,
                     std::vector<index_type> cols)
      : n_cols_(n_cols), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)) {
    detail::require(!row_ptr_.empty() && row_ptr_.front() == 0 && row_ptr_.back() == cols_.size(),
                    "SparseBinaryMatrix: inconsistent row pointer array");
    validate();
  }

  std::size_t rows() const noexcept { return row_ptr_.size() - 1; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const index_type> row(std::size_t i) const noexcept {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::size_t row_nnz(std::size_t i) const noexcept { return row_ptr_[i + 1] - row_ptr_[i]; }

  const std::vector<std::size_t>& row_pointers() const noexcept { return row_ptr_; }
  const std::vector<index_type>& column_indices() const noexcept { return cols_; }

  SparseBinaryMatrix select_rows(std::span<const std::size_t> which) const {
    std::vector<std::size_t> ptr{0};
    std::vector<index_type> out;
    for (std::size_t i : which) {
      detail::require(i < rows(), "SparseBinaryMatrix::select_rows: index out of range");
      auto r = row(i);
      out.insert(out.end(), r.begin(), r.end());
      ptr.push_back(out.size());
    }
    return SparseBinaryMatrix(n_cols_, std::move(ptr), std::move(out));
  }

  /// Same rows viewed with a wider feature space (new_cols >= cols()).
  SparseBinaryMatrix with_cols(std::size_t new_cols) const {
    detail::require(new_cols >= n_cols_, "SparseBinaryMatrix::with_cols: cannot shrink");
    return SparseBinaryMatrix(new_cols, row_ptr_, cols_);
  }

  DenseMatrix to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows()),
                                      static_cast<Eigen::Index>(n_cols_));
    for (std::size_t i = 0; i < rows(); ++i)
      for (index_type c : row(i)) d(static_cast<Eigen::Index>(i), c) = 1.0;
    return d;
  }

  friend bool operator==(const SparseBinaryMatrix&, const SparseBinaryMatrix&) = default;

 private:
  void validate() const {
    for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
      detail::require(row_ptr_[i] <= row_ptr_[i + 1], "SparseBinaryMatrix: decreasing row pointer");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (cols_[k] >= n_cols_)
          throw ContractViolation("SparseBinaryMatrix: column index " + std::to_string(cols_[k]) +
                                  " out of range in row " + std::to_string(i));
        if (k > row_ptr_[i] && cols_[k] <= cols_[k - 1])
          throw ContractViolation("SparseBinaryMatrix: row " + std::to_string(i) +
                                  " has duplicate or unsorted column indices");
      }
    }
  }

  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<index_type> cols_;
};

/// Row-wise concatenation.
inline SparseBinaryMatrix vstack(const SparseBinaryMatrix& top, const SparseBinaryMatrix& bottom) {
  detail::require(top.cols() == bottom.cols(), "vstack: feature dimensions differ");
  std::vector<std::size_t> ptr = top.row_pointers();
  std::vector<SparseBinaryMatrix::index_type> cols = top.column_indices();
  const std::size_t offset = cols.size();
  for (std::size_t i = 1; i < bottom.row_pointers().size(); ++i)
    ptr.push_back(offset + bottom.row_pointers()[i]);
  cols.insert(cols.end(), bottom.column_indices().begin(), bottom.column_indices().end());
  return SparseBinaryMatrix(top.cols(), std::move(ptr), std::move(cols));
}

/// Number of stored entries in every row.
inline std::vector<std::size_t> row_counts(const SparseBinaryMatrix& a) {
  std::vector<std::size_t> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = a.row_nnz(i);
  return out;
}

namespace detail {

// Column-major view of the matrix: for every feature, the ascending list of
// rows that contain it.
struct ColumnIndex {
  std::vector<std::size_t> ptr;
  std::vector<std::uint32_t> rows;
};

inline ColumnIndex column_index(const SparseBinaryMatrix& b) {
  ColumnIndex idx;
  idx.ptr.assign(b.cols() + 1, 0);
  for (auto c : b.column_indices()) ++idx.ptr[c + 1];
  for (std::size_t c = 0; c < b.cols(); ++c) idx.ptr[c + 1] += idx.ptr[c];
  idx.rows.resize(b.nnz());
  std::vector<std::size_t> fill(idx.ptr.begin(), idx.ptr.end() - 1);
  for (std::size_t j = 0; j < b.rows(); ++j)
    for (auto c : b.row(j)) idx.rows[fill[c]++] = static_cast<std::uint32_t>(j);
  return idx;
}

inline constexpr std::size_t kRowChunk = 32;

}  // namespace detail

/// Intersection counts: entry (i, j) is |row_i(a) ∩ row_j(b)|, exact.
///
/// Each output row is accumulated by a single worker, scattering over the
/// inverted index of b; the output row itself serves as the dense accumulator.
inline DenseMatrix sparse_gram(const SparseBinaryMatrix& a, const SparseBinaryMatrix& b) {
  detail::require(a.cols() == b.cols(), "sparse_gram: feature dimensions differ");
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(a.rows()),
                                      static_cast<Eigen::Index>(b.rows()));
  if (a.rows() == 0 || b.rows() == 0) return out;
  const auto index = detail::column_index(b);
  parallel_for(a.rows(), detail::kRowChunk, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* acc = out.row(static_cast<Eigen::Index>(i)).data();
      for (auto c : a.row(i))
        for (std::size_t k = index.ptr[c]; k < index.ptr[c + 1]; ++k) acc[index.rows[k]] += 1.0;
    }
  });
  return out;
}

/// a * v with a's implicit ones. Each output row sums rows of v in ascending
/// column order, so results do not depend on the worker count.
inline DenseMatrix sparse_dense_product(const SparseBinaryMatrix& a, const DenseMatrix& v) {
  detail::require(a.cols() == static_cast<std::size_t>(v.rows()),
                  "sparse_dense_product: inner dimensions differ");
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(a.rows()), v.cols());
  parallel_for(a.rows(), detail::kRowChunk, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto dst = out.row(static_cast<Eigen::Index>(i));
      for (auto c : a.row(i)) dst += v.row(c);
    }
  });
  return out;
}

/// Fraction of exactly-zero entries.
inline double zero_fraction(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  return static_cast<double>((m.array() == 0.0).count()) / static_cast<double>(m.size());
}

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

}  // namespace srpelm

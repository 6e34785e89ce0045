#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

/// Class labels, each +1 or -1.
using Labels = std::vector<int>;

/// The two sample representations every model accepts.
template <class T>
concept FeatureMatrix =
    std::same_as<std::remove_cvref_t<T>, SparseBinaryMatrix> || std::same_as<std::remove_cvref_t<T>, DenseMatrix>;

inline std::size_t sample_count(const SparseBinaryMatrix& x) { return x.rows(); }
inline std::size_t sample_count(const DenseMatrix& x) { return static_cast<std::size_t>(x.rows()); }
inline std::size_t feature_count(const SparseBinaryMatrix& x) { return x.cols(); }
inline std::size_t feature_count(const DenseMatrix& x) { return static_cast<std::size_t>(x.cols()); }

inline SparseBinaryMatrix select_rows(const SparseBinaryMatrix& x, std::span<const std::size_t> idx) {
  return x.select_rows(idx);
}
inline DenseMatrix select_rows(const DenseMatrix& x, std::span<const std::size_t> idx) {
  DenseMatrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    detail::require(idx[k] < static_cast<std::size_t>(x.rows()), "select_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

inline void check_labels(const Labels& y, std::size_t n, const char* who) {
  if (y.size() != n)
    throw ContractViolation(std::string(who) + ": label count differs from sample count");
  for (int v : y)
    if (v != 1 && v != -1) throw ContractViolation(std::string(who) + ": labels must be +1 or -1");
}

/// Labels as an N x 1 real target column.
inline DenseMatrix label_column(const Labels& y) {
  DenseMatrix col(static_cast<Eigen::Index>(y.size()), 1);
  for (std::size_t i = 0; i < y.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = y[i];
  return col;
}

}  // namespace srpelm

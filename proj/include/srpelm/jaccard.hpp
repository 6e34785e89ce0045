#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/parallel.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

enum class DistanceKind { squared_euclidean, jaccard };

inline const char* to_string(DistanceKind k) {
  return k == DistanceKind::jaccard ? "jaccard" : "squared-euclidean";
}

inline DistanceKind distance_kind_from_string(const std::string& s) {
  if (s == "jaccard") return DistanceKind::jaccard;
  if (s == "squared-euclidean" || s == "euclidean") return DistanceKind::squared_euclidean;
  throw ParameterError("unknown distance kind '" + s + "'");
}

/// Rows index the first operand, columns the second.
struct DistanceMatrix {
  DenseMatrix values;
  DistanceKind kind = DistanceKind::jaccard;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
};

struct JaccardOptions {
  // Upper bound on the intersection-count scratch held at once; b is
  // processed in row blocks that fit.
  std::size_t memory_budget_bytes = std::size_t{256} << 20;
};

/// All-pairs Jaccard distance 1 - |a ∩ b| / |a ∪ b| between rows of a and b,
/// with |a ∪ b| = |a| + |b| - |a ∩ b| and the intersections taken from one
/// sparse product. Two empty rows are at distance 0; an empty row is at
/// distance 1 from any nonempty row.
inline DistanceMatrix jaccard_distance_matrix(const SparseBinaryMatrix& a,
                                              const SparseBinaryMatrix& b,
                                              const JaccardOptions& opt = {}) {
  detail::require(a.cols() == b.cols(), "jaccard_distance_matrix: feature dimensions differ");
  DistanceMatrix out{DenseMatrix(static_cast<Eigen::Index>(a.rows()),
                                 static_cast<Eigen::Index>(b.rows())),
                     DistanceKind::jaccard};
  if (a.rows() == 0 || b.rows() == 0) return out;

  const auto count_a = row_counts(a);
  const auto count_b = row_counts(b);
  const std::size_t row_bytes = std::max<std::size_t>(1, a.rows() * sizeof(double));
  const std::size_t block = std::clamp<std::size_t>(opt.memory_budget_bytes / row_bytes, 1, b.rows());

  std::vector<std::size_t> ids;
  for (std::size_t start = 0; start < b.rows(); start += block) {
    const std::size_t stop = std::min(b.rows(), start + block);
    ids.resize(stop - start);
    for (std::size_t j = start; j < stop; ++j) ids[j - start] = j;
    const DenseMatrix inter = sparse_gram(a, b.select_rows(ids));
    parallel_for(a.rows(), detail::kRowChunk, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = start; j < stop; ++j) {
          const double g = inter(r, static_cast<Eigen::Index>(j - start));
          const double uni = static_cast<double>(count_a[i] + count_b[j]) - g;
          out.values(r, static_cast<Eigen::Index>(j)) = uni == 0.0 ? 0.0 : 1.0 - g / uni;
        }
      }
    });
  }
  return out;
}

/// Squared Euclidean distances between rows of dense a and b, via
/// |x|^2 + |y|^2 - 2 x.y with negatives from cancellation clamped to 0.
/// Products are taken over fixed row blocks of a, independent of worker count.
inline DistanceMatrix squared_euclidean_matrix(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.cols() == b.cols(), "squared_euclidean_matrix: feature dimensions differ");
  DistanceMatrix out{DenseMatrix(a.rows(), b.rows()), DistanceKind::squared_euclidean};
  if (a.rows() == 0 || b.rows() == 0) return out;
  const Vector nb = b.rowwise().squaredNorm();
  constexpr std::size_t block = 128;
  parallel_for(static_cast<std::size_t>(a.rows()), block, [&](std::size_t lo, std::size_t hi) {
    const auto r0 = static_cast<Eigen::Index>(lo);
    const auto n = static_cast<Eigen::Index>(hi - lo);
    DenseMatrix dot = a.middleRows(r0, n) * b.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double na = a.row(r0 + i).squaredNorm();
      for (Eigen::Index j = 0; j < b.rows(); ++j)
        out.values(r0 + i, j) = std::max(0.0, na + nb(j) - 2.0 * dot(i, j));
    }
  });
  return out;
}

/// Binary rows: |a - b|^2 = |a| + |b| - 2 |a ∩ b|, exact.
inline DistanceMatrix squared_euclidean_matrix(const SparseBinaryMatrix& a, const SparseBinaryMatrix& b) {
  DistanceMatrix out{-2.0 * sparse_gram(a, b), DistanceKind::squared_euclidean};
  const auto na = row_counts(a);
  const auto nb = row_counts(b);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out.values(i, j) += static_cast<double>(na[static_cast<std::size_t>(i)] + nb[static_cast<std::size_t>(j)]);
  return out;
}

/// Distance matrix of the given kind; jaccard needs sparse binary rows.
template <FeatureMatrix X>
DistanceMatrix distance_matrix(const X& a, const X& b, DistanceKind kind) {
  if constexpr (std::same_as<X, SparseBinaryMatrix>) {
    if (kind == DistanceKind::jaccard) return jaccard_distance_matrix(a, b);
    return squared_euclidean_matrix(a, b);
  } else {
    detail::require_param(kind == DistanceKind::squared_euclidean,
                          "jaccard distance requires sparse binary inputs");
    return squared_euclidean_matrix(a, b);
  }
}

}  // namespace srpelm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/jaccard.hpp"
#include "srpelm/parallel.hpp"
#include "srpelm/ridge.hpp"

namespace srpelm {

enum class KernelKind { linear_srp, jaccard_similarity };

inline const char* to_string(KernelKind k) {
  return k == KernelKind::jaccard_similarity ? "jaccard-similarity" : "linear-srp";
}

inline KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "jaccard-similarity" || s == "jaccard") return KernelKind::jaccard_similarity;
  if (s == "linear-srp" || s == "linear") return KernelKind::linear_srp;
  throw ParameterError("unknown kernel kind '" + s + "'");
}

/// linear-srp: inner products a b^T. jaccard-similarity: 1 - J(a, b), which
/// needs sparse binary rows.
template <FeatureMatrix X>
DenseMatrix kernel_matrix(KernelKind kind, const X& a, const X& b) {
  detail::require(feature_count(a) == feature_count(b), "kernel_matrix: feature dimensions differ");
  if constexpr (std::same_as<X, SparseBinaryMatrix>) {
    if (kind == KernelKind::jaccard_similarity)
      return (1.0 - jaccard_distance_matrix(a, b).values.array()).matrix();
    return sparse_gram(a, b);
  } else {
    detail::require_param(kind == KernelKind::linear_srp,
                          "kernel_matrix: jaccard similarity requires sparse binary inputs");
    DenseMatrix k(a.rows(), b.rows());
    constexpr std::size_t block = 128;
    parallel_for(static_cast<std::size_t>(a.rows()), block, [&](std::size_t lo, std::size_t hi) {
      const auto r0 = static_cast<Eigen::Index>(lo);
      const auto n = static_cast<Eigen::Index>(hi - lo);
      k.middleRows(r0, n).noalias() = a.middleRows(r0, n) * b.transpose();
    });
    return k;
  }
}

/// Dual ridge solution on a precomputed kernel.
struct KrrFit {
  Vector alpha;
  double lambda = 0.0;
  double press = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> press_by_lambda;
};

/// Solves (K + lambda I) alpha = y with lambda chosen by the dual
/// leave-one-out identity (leverages from the diagonal of K (K + lambda I)^-1).
inline KrrFit krr_fit(const DenseMatrix& k, const Labels& y, const std::vector<double>& grid = lambda_grid()) {
  detail::require(k.rows() == k.cols(), "krr_fit: kernel must be square");
  check_labels(y, static_cast<std::size_t>(k.rows()), "krr_fit");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  detail::require((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale,
                  "krr_fit: kernel matrix is not symmetric");
  const auto s = SpectralRidge::from_kernel(k, label_column(y));
  auto choice = select_lambda(s, grid);
  KrrFit fit;
  fit.alpha = s.dual_coefficients(choice.lambda).col(0);
  fit.lambda = choice.lambda;
  fit.press = choice.press;
  fit.lambda_grid = grid;
  fit.press_by_lambda = std::move(choice.press_by_lambda);
  return fit;
}

/// Kernel ridge model that keeps its training rows to form test kernels.
template <FeatureMatrix X>
struct KrrModel {
  KrrFit fit;
  KernelKind kernel_kind = KernelKind::linear_srp;
  X train;
};

template <FeatureMatrix X>
KrrModel<X> krr_fit(KernelKind kind, const X& x, const Labels& y,
                    const std::vector<double>& grid = lambda_grid()) {
  detail::require(sample_count(x) > 0, "krr_fit: empty training set");
  return KrrModel<X>{krr_fit(kernel_matrix(kind, x, x), y, grid), kind, x};
}

template <FeatureMatrix X>
Vector krr_predict(const KrrModel<X>& m, const X& x) {
  detail::require(feature_count(x) == feature_count(m.train), "krr_predict: feature dimension mismatch");
  if (sample_count(x) == 0) return Vector(0);
  return kernel_matrix(m.kernel_kind, x, m.train) * m.fit.alpha;
}

// ---------------------------------------------------------------------------
// k nearest neighbours

/// Mean label among the k nearest training rows for every test row of a
/// (test x train) distance matrix; equal distances prefer the lower training
/// index. The class is sign(score).
inline Vector knn_predict(const DenseMatrix& dist, const Labels& labels, std::size_t k) {
  const auto n_train = static_cast<std::size_t>(dist.cols());
  detail::require_param(k % 2 == 1, "knn_predict: k must be odd");
  detail::require_param(k >= 1 && k <= n_train, "knn_predict: k must lie in [1, n_train]");
  detail::require(labels.size() == n_train, "knn_predict: label count differs from training rows");
  Vector scores(dist.rows());
  parallel_for(static_cast<std::size_t>(dist.rows()), 64, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      std::iota(order.begin(), order.end(), std::size_t{0});
      auto closer = [&](std::size_t a, std::size_t b) {
        const double da = dist(r, static_cast<Eigen::Index>(a));
        const double db = dist(r, static_cast<Eigen::Index>(b));
        return da < db || (da == db && a < b);
      };
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
      long vote = 0;
      for (std::size_t q = 0; q < k; ++q) vote += labels[order[q]];
      scores(r) = static_cast<double>(vote) / static_cast<double>(k);
    }
  });
  return scores;
}

inline Vector knn_predict(const DistanceMatrix& dist, const Labels& labels, std::size_t k) {
  return knn_predict(dist.values, labels, k);
}

template <FeatureMatrix X>
struct KnnModel {
  X train;
  Labels labels;
  std::size_t k = 1;
  DistanceKind distance_kind = DistanceKind::squared_euclidean;
};

template <FeatureMatrix X>
KnnModel<X> knn_fit(const X& x, const Labels& y, std::size_t k, DistanceKind kind) {
  check_labels(y, sample_count(x), "knn_fit");
  detail::require_param(k % 2 == 1, "knn_fit: k must be odd");
  detail::require_param(k >= 1 && k <= sample_count(x), "knn_fit: k must lie in [1, n_train]");
  if constexpr (std::same_as<X, DenseMatrix>)
    detail::require_param(kind == DistanceKind::squared_euclidean,
                          "knn_fit: jaccard distance requires sparse binary inputs");
  return KnnModel<X>{x, y, k, kind};
}

template <FeatureMatrix X>
Vector knn_predict(const KnnModel<X>& m, const X& x) {
  detail::require(feature_count(x) == feature_count(m.train), "knn_predict: feature dimension mismatch");
  if (sample_count(x) == 0) return Vector(0);
  return knn_predict(distance_matrix(x, m.train, m.distance_kind), m.labels, m.k);
}

}  // namespace srpelm

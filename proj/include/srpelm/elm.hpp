#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srpelm/diagnostics.hpp"
#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/jaccard.hpp"
#include "srpelm/parallel.hpp"
#include "srpelm/random.hpp"
#include "srpelm/ridge.hpp"
#include "srpelm/srp.hpp"

namespace srpelm {

enum class Activation { tanh };

// Sub-stream tags derived from a model seed.
namespace seed_tag {
inline constexpr std::uint64_t hidden = 0;
inline constexpr std::uint64_t bias = 1;
inline constexpr std::uint64_t linear = 2;
inline constexpr std::uint64_t centroids = 3;
inline constexpr std::uint64_t widths = 4;
}  // namespace seed_tag

/// ELM, or RVFL when linear_part is set. Hidden weights and bias are both
/// ternary sparse-random draws, so the whole hidden layer is reproducible
/// from (input_dim, hidden width, density, seed).
struct ElmModel {
  SparseProjection hidden;
  Vector bias;
  Activation activation = Activation::tanh;
  std::optional<SparseProjection> linear_part;
  RidgeSolution solution;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return hidden.input_dim(); }
  std::size_t width() const { return hidden.output_dim(); }
};

/// tanh(x W + 1 b^T).
template <FeatureMatrix X>
DenseMatrix elm_hidden(const X& x, const SparseProjection& w, const Vector& bias,
                       Activation activation = Activation::tanh) {
  detail::require(feature_count(x) == w.input_dim(), "elm_hidden: feature dimension mismatch");
  detail::require(static_cast<std::size_t>(bias.size()) == w.output_dim(),
                  "elm_hidden: bias length differs from hidden width");
  (void)activation;
  DenseMatrix h = apply_projection(x, w);
  h.rowwise() += bias.transpose();
  h = h.array().tanh().matrix();
  return h;
}

/// Bias vector: one extra ternary column with the hidden layer's density and scale.
inline Vector ternary_bias(std::size_t width, double density, std::uint64_t seed) {
  const SparseProjection col = make_projection(1, width, density, seed);
  Vector b = Vector::Zero(static_cast<Eigen::Index>(width));
  auto c = col.row_cols(0);
  auto v = col.row_values(0);
  for (std::size_t k = 0; k < c.size(); ++k) b(c[k]) = v[k];
  return b;
}

template <FeatureMatrix X>
DenseMatrix elm_design(const ElmModel& m, const X& x) {
  DenseMatrix h = elm_hidden(x, m.hidden, m.bias, m.activation);
  if (!m.linear_part) return h;
  const DenseMatrix lin = apply_projection(x, *m.linear_part);
  DenseMatrix full(h.rows(), h.cols() + lin.cols());
  full << h, lin;
  return full;
}

namespace detail {

template <FeatureMatrix X>
ElmModel elm_setup(const X& x, const Labels& y, std::size_t hidden, double density,
                   std::uint64_t seed, const char* who) {
  require_param(hidden >= 1, std::string(who) + ": hidden width must be at least 1");
  require(sample_count(x) > 0, "elm: empty training set");
  check_labels(y, sample_count(x), who);
  ElmModel m;
  m.seed = seed;
  m.hidden = make_projection(feature_count(x), hidden, density, derive_seed(seed, seed_tag::hidden));
  m.bias = ternary_bias(hidden, density, derive_seed(seed, seed_tag::bias));
  return m;
}

/// Ridge output weights. Constant labels carry no class information, so the
/// weights are zero and every score is 0.
inline RidgeSolution fit_output_weights(const DenseMatrix& h, const Labels& y, const std::vector<double>& grid,
                                        const char* who) {
  if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) != y.end())
    return solve_ridge_press(h, label_column(y), grid);
  require_param(!grid.empty(), std::string(who) + ": empty lambda grid");
  warn(std::string(who) + ": all training labels are equal; output weights set to zero");
  RidgeSolution s;
  s.beta = DenseMatrix::Zero(h.cols(), 1);
  s.lambda = *std::max_element(grid.begin(), grid.end());
  s.press = static_cast<double>(y.size());
  s.lambda_grid = grid;
  return s;
}

}  // namespace detail

template <FeatureMatrix X>
ElmModel elm_fit(const X& x, const Labels& y, std::size_t hidden, double density,
                 std::uint64_t seed, const std::vector<double>& grid = lambda_grid()) {
  ElmModel m = detail::elm_setup(x, y, hidden, density, seed, "elm_fit");
  m.solution = detail::fit_output_weights(elm_design(m, x), y, grid, "elm_fit");
  return m;
}

/// ELM plus a random linear combination of the inputs (no activation) as
/// extra design columns. d_lin = 0 is rejected.
template <FeatureMatrix X>
ElmModel rvfl_fit(const X& x, const Labels& y, std::size_t hidden, std::size_t linear_dim,
                  double density, std::uint64_t seed, const std::vector<double>& grid = lambda_grid()) {
  detail::require_param(linear_dim >= 1, "rvfl_fit: linear dimension must be at least 1");
  ElmModel m = detail::elm_setup(x, y, hidden, density, seed, "rvfl_fit");
  m.linear_part = make_projection(feature_count(x), linear_dim, density,
                                  derive_seed(seed, seed_tag::linear));
  m.solution = detail::fit_output_weights(elm_design(m, x), y, grid, "rvfl_fit");
  return m;
}

/// Real-valued scores H beta; the class is sign(score).
template <FeatureMatrix X>
Vector model_predict(const ElmModel& m, const X& x) {
  detail::require(feature_count(x) == m.input_dim(), "model_predict: feature dimension mismatch");
  if (sample_count(x) == 0) return Vector(0);
  return elm_design(m, x) * m.solution.beta.col(0);
}

// ---------------------------------------------------------------------------
// RBF-ELM

template <FeatureMatrix X>
struct RbfModel {
  X centroids;
  Vector gammas;
  DistanceKind distance_kind = DistanceKind::squared_euclidean;
  RidgeSolution solution;
  double median_distance = 1.0;
  std::uint64_t seed = 0;

  std::size_t width() const { return static_cast<std::size_t>(gammas.size()); }
};

/// Squared distances d^2(x_i, c_j) of the requested kind.
template <FeatureMatrix X>
DenseMatrix squared_distances(const X& x, const X& c, DistanceKind kind) {
  DistanceMatrix d = distance_matrix(x, c, kind);
  if (kind == DistanceKind::jaccard) return d.values.array().square().matrix();
  return std::move(d.values);
}

/// H_ij = exp(-gamma_j d^2(x_i, c_j)).
template <FeatureMatrix X>
DenseMatrix rbf_hidden(const X& x, const X& centroids, const Vector& gammas, DistanceKind kind) {
  detail::require(feature_count(x) == feature_count(centroids), "rbf_hidden: feature dimension mismatch");
  detail::require(sample_count(centroids) == static_cast<std::size_t>(gammas.size()),
                  "rbf_hidden: one width per centroid required");
  DenseMatrix h = squared_distances(x, centroids, kind);
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    h.row(i) = (-(h.row(i).array() * gammas.transpose().array())).exp();
  return h;
}

/// Median of the pairwise (unsquared) distances among the rows of c; 0 when
/// fewer than two rows.
template <FeatureMatrix X>
double median_pairwise_distance(const X& c, DistanceKind kind) {
  const DenseMatrix d2 = squared_distances(c, c, kind);
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < d2.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d2.cols(); ++j) vals.push_back(std::sqrt(d2(i, j)));
  if (vals.empty()) return 0.0;
  const std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
  double hi = vals[mid];
  if (vals.size() % 2 == 1) return hi;
  const double lo = *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Widths gamma_j = g_j / m^2 with g_j log-uniform on [0.1, 10].
inline Vector rbf_widths(std::size_t count, double median_distance, std::uint64_t seed) {
  Vector g(static_cast<Eigen::Index>(count));
  const double lo = std::log(0.1), hi = std::log(10.0);
  const double m2 = median_distance * median_distance;
  for (std::size_t j = 0; j < count; ++j)
    g(static_cast<Eigen::Index>(j)) = std::exp(lo + (hi - lo) * to_unit(counter_hash(seed, 0, j))) / m2;
  return g;
}

template <FeatureMatrix X>
RbfModel<X> rbf_fit(const X& x, const Labels& y, std::size_t hidden, DistanceKind kind,
                    std::uint64_t seed, const std::vector<double>& grid = lambda_grid()) {
  const std::size_t n = sample_count(x);
  detail::require_param(hidden >= 1, "rbf_fit: hidden width must be at least 1");
  detail::require_param(hidden <= n, "rbf_fit: more centroids requested than training samples");
  check_labels(y, n, "rbf_fit");
  if constexpr (std::same_as<X, DenseMatrix>)
    detail::require_param(kind == DistanceKind::squared_euclidean,
                          "rbf_fit: jaccard distance requires sparse binary inputs");

  RbfModel<X> m;
  m.seed = seed;
  m.distance_kind = kind;
  const auto picks = sample_without_replacement(n, hidden, derive_seed(seed, seed_tag::centroids));
  m.centroids = select_rows(x, picks);
  double med = median_pairwise_distance(m.centroids, kind);
  if (!(med > 0.0)) {
    warn("rbf_fit: centroids have zero median pairwise distance; using unit kernel scale");
    med = 1.0;
  }
  m.median_distance = med;
  m.gammas = rbf_widths(hidden, med, derive_seed(seed, seed_tag::widths));
  m.solution = detail::fit_output_weights(rbf_hidden(x, m.centroids, m.gammas, kind), y, grid, "rbf_fit");
  return m;
}

template <FeatureMatrix X>
Vector model_predict(const RbfModel<X>& m, const X& x) {
  detail::require(feature_count(x) == feature_count(m.centroids), "model_predict: feature dimension mismatch");
  if (sample_count(x) == 0) return Vector(0);
  return rbf_hidden(x, m.centroids, m.gammas, m.distance_kind) * m.solution.beta.col(0);
}

}  // namespace srpelm

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/keyvalue.hpp"
#include "srpelm/parallel.hpp"
#include "srpelm/random.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

/// Ternary sparse random projection from input_dim to output_dim.
///
/// Entry (f, j) is +scale or -scale with probability density/2 each and zero
/// otherwise, where scale = sqrt(s / output_dim) and s = 1 / density. Entries
/// are drawn from a counter-based stream keyed by (seed, f * output_dim + j),
/// so the matrix is a pure function of (input_dim, output_dim, density, seed).
/// Nonzeros are stored grouped by input row.
class SparseProjection {
 public:
  SparseProjection() = default;

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  double density() const noexcept { return density_; }
  double inverse_density() const noexcept { return 1.0 / density_; }
  double scale() const noexcept { return scale_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const std::uint32_t> row_cols(std::size_t f) const noexcept {
    return {cols_.data() + row_ptr_[f], row_ptr_[f + 1] - row_ptr_[f]};
  }
  std::span<const double> row_values(std::size_t f) const noexcept {
    return {values_.data() + row_ptr_[f], row_ptr_[f + 1] - row_ptr_[f]};
  }

  DenseMatrix to_dense() const {
    DenseMatrix w = DenseMatrix::Zero(static_cast<Eigen::Index>(input_dim_),
                                      static_cast<Eigen::Index>(output_dim_));
    for (std::size_t f = 0; f < input_dim_; ++f) {
      auto c = row_cols(f);
      auto v = row_values(f);
      for (std::size_t k = 0; k < c.size(); ++k) w(static_cast<Eigen::Index>(f), c[k]) = v[k];
    }
    return w;
  }

  friend bool operator==(const SparseProjection&, const SparseProjection&) = default;

 private:
  friend SparseProjection make_projection(std::size_t, std::size_t, double, std::uint64_t);

  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  double density_ = 1.0;
  double scale_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<double> values_;
};

/// 1/sqrt(D), the very-sparse default.
inline double default_density(std::size_t input_dim) {
  detail::require(input_dim >= 1, "default_density: input dimension must be at least 1");
  return 1.0 / std::sqrt(static_cast<double>(input_dim));
}

inline SparseProjection make_projection(std::size_t input_dim, std::size_t output_dim,
                                        double density, std::uint64_t seed) {
  detail::require_param(input_dim >= 1 && output_dim >= 1,
                        "make_projection: dimensions must be at least 1");
  detail::require_param(density > 0.0 && density <= 1.0 && std::isfinite(density),
                        "make_projection: density must lie in (0, 1]");
  detail::require_param(output_dim <= UINT32_MAX, "make_projection: output dimension too large");

  SparseProjection p;
  p.input_dim_ = input_dim;
  p.output_dim_ = output_dim;
  p.density_ = density;
  p.seed_ = seed;
  p.scale_ = std::sqrt((1.0 / density) / static_cast<double>(output_dim));

  constexpr std::size_t chunk = 256;
  const std::size_t n_chunks = (input_dim + chunk - 1) / chunk;
  struct Block {
    std::vector<std::size_t> counts;
    std::vector<std::uint32_t> cols;
    std::vector<double> values;
  };
  std::vector<Block> blocks(n_chunks);
  const double scale = p.scale_;
  parallel_for(input_dim, chunk, [&](std::size_t lo, std::size_t hi) {
    Block& b = blocks[lo / chunk];
    b.counts.reserve(hi - lo);
    for (std::size_t f = lo; f < hi; ++f) {
      const std::size_t before = b.cols.size();
      const std::uint64_t base = static_cast<std::uint64_t>(f) * output_dim;
      for (std::size_t j = 0; j < output_dim; ++j) {
        // Stage one: zero or nonzero. Stage two: sign.
        if (to_unit(counter_hash(seed, 0, base + j)) >= density) continue;
        const bool negative = (counter_hash(seed, 1, base + j) >> 63) != 0;
        b.cols.push_back(static_cast<std::uint32_t>(j));
        b.values.push_back(negative ? -scale : scale);
      }
      b.counts.push_back(b.cols.size() - before);
    }
  });

  p.row_ptr_.reserve(input_dim + 1);
  for (auto& b : blocks) {
    for (auto c : b.counts) p.row_ptr_.push_back(p.row_ptr_.back() + c);
    p.cols_.insert(p.cols_.end(), b.cols.begin(), b.cols.end());
    p.values_.insert(p.values_.end(), b.values.begin(), b.values.end());
  }
  return p;
}

/// x * P for sparse binary samples.
inline DenseMatrix apply_projection(const SparseBinaryMatrix& x, const SparseProjection& p) {
  detail::require(x.cols() == p.input_dim(), "apply_projection: feature dimension mismatch");
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(x.rows()),
                                      static_cast<Eigen::Index>(p.output_dim()));
  parallel_for(x.rows(), detail::kRowChunk, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* dst = out.row(static_cast<Eigen::Index>(i)).data();
      for (auto f : x.row(i)) {
        auto c = p.row_cols(f);
        auto v = p.row_values(f);
        for (std::size_t k = 0; k < c.size(); ++k) dst[c[k]] += v[k];
      }
    }
  });
  return out;
}

/// x * P for dense real samples; zero features are skipped.
inline DenseMatrix apply_projection(const DenseMatrix& x, const SparseProjection& p) {
  detail::require(static_cast<std::size_t>(x.cols()) == p.input_dim(),
                  "apply_projection: feature dimension mismatch");
  DenseMatrix out = DenseMatrix::Zero(x.rows(), static_cast<Eigen::Index>(p.output_dim()));
  parallel_for(static_cast<std::size_t>(x.rows()), detail::kRowChunk,
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t i = lo; i < hi; ++i) {
                   const auto r = static_cast<Eigen::Index>(i);
                   double* dst = out.row(r).data();
                   for (std::size_t f = 0; f < p.input_dim(); ++f) {
                     const double z = x(r, static_cast<Eigen::Index>(f));
                     if (z == 0.0) continue;
                     auto c = p.row_cols(f);
                     auto v = p.row_values(f);
                     for (std::size_t k = 0; k < c.size(); ++k) dst[c[k]] += z * v[k];
                   }
                 }
               });
  return out;
}

/// Sidecar record that fully determines a projection.
inline KeyValue projection_metadata(const SparseProjection& p) {
  KeyValue kv;
  kv.set("input_dim", p.input_dim());
  kv.set("output_dim", p.output_dim());
  kv.set("density", p.density());
  kv.set("seed", p.seed());
  return kv;
}

inline SparseProjection projection_from_metadata(const KeyValue& kv) {
  return make_projection(static_cast<std::size_t>(kv.get_uint("input_dim")),
                         static_cast<std::size_t>(kv.get_uint("output_dim")),
                         kv.get_double("density"), kv.get_uint("seed"));
}

}  // namespace srpelm

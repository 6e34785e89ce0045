#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/keyvalue.hpp"
#include "srpelm/parallel.hpp"
#include "srpelm/random.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

/// Binary sparse block, optional dense real-valued block, and +-1 labels.
struct Dataset {
  SparseBinaryMatrix sparse;
  std::optional<DenseMatrix> dense;
  Labels labels;
  std::string name;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dense_feature_count() const noexcept {
    return dense ? static_cast<std::size_t>(dense->cols()) : 0;
  }

  void validate() const {
    detail::require(sparse.rows() == labels.size(), "Dataset: sparse row count differs from label count");
    if (dense) {
      detail::require(static_cast<std::size_t>(dense->rows()) == labels.size(),
                      "Dataset: dense row count differs from label count");
      detail::require(dense->allFinite(), "Dataset: non-finite dense feature");
    }
    for (int l : labels) detail::require(l == 1 || l == -1, "Dataset: labels must be +1 or -1");
  }
};

struct SvmlightOptions {
  std::size_t dense_feature_count = 0;  // lowest-numbered features kept real-valued
  int index_base = 1;
  std::size_t sparse_feature_count = 0;  // 0: infer from the largest index seen
};

/// Parses `<label> <index>:<value> ...` lines. The first dense_feature_count
/// feature positions fill the dense block; every other nonzero becomes a 1 in
/// the sparse block, renumbered from 0. Labels > 0 map to +1, the rest to -1.
/// Within a line indices may come in any order; repeats are an error. Text
/// after '#' and `qid:` tokens are ignored.
inline Dataset parse_svmlight(std::istream& in, const std::string& source, const SvmlightOptions& opt = {}) {
  detail::require_param(opt.index_base == 0 || opt.index_base == 1, "svmlight: index base must be 0 or 1");
  using Index = SparseBinaryMatrix::index_type;
  std::vector<std::vector<Index>> rows;
  std::vector<std::vector<std::pair<std::size_t, double>>> dense_rows;
  Dataset ds;
  ds.name = source;
  std::size_t max_col = 0;
  bool any_col = false;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;

    double label_value = 0.0;
    try {
      label_value = parse_double(tok, "label");
    } catch (const ParameterError&) {
      throw IngestionError(source, lineno, "unparseable label '" + tok + "'");
    }
    ds.labels.push_back(label_value > 0 ? 1 : -1);

    std::vector<Index> cols;
    std::vector<std::pair<std::size_t, double>> dense_vals;
    while (tokens >> tok) {
      if (tok.rfind("qid:", 0) == 0) continue;
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw IngestionError(source, lineno, "expected index:value, got '" + tok + "'");
      std::int64_t idx = 0;
      double val = 0.0;
      try {
        idx = parse_int(tok.substr(0, colon), "index");
        val = parse_double(tok.substr(colon + 1), "value");
      } catch (const ParameterError& e) {
        throw IngestionError(source, lineno, e.what());
      }
      if (idx < opt.index_base) throw IngestionError(source, lineno, "feature index below index base: " + tok);
      if (!std::isfinite(val)) throw IngestionError(source, lineno, "non-finite feature value: " + tok);
      const auto f = static_cast<std::size_t>(idx - opt.index_base);
      if (f < opt.dense_feature_count) {
        dense_vals.emplace_back(f, val);
        continue;
      }
      if (val == 0.0) continue;
      const std::size_t c = f - opt.dense_feature_count;
      if (c > UINT32_MAX) throw IngestionError(source, lineno, "feature index too large: " + tok);
      if (opt.sparse_feature_count && c >= opt.sparse_feature_count)
        throw IngestionError(source, lineno, "feature index beyond declared dimension: " + tok);
      cols.push_back(static_cast<Index>(c));
      max_col = std::max(max_col, c);
      any_col = true;
    }
    std::sort(cols.begin(), cols.end());
    if (std::adjacent_find(cols.begin(), cols.end()) != cols.end())
      throw IngestionError(source, lineno, "repeated feature index");
    std::sort(dense_vals.begin(), dense_vals.end());
    for (std::size_t k = 1; k < dense_vals.size(); ++k)
      if (dense_vals[k].first == dense_vals[k - 1].first)
        throw IngestionError(source, lineno, "repeated feature index");
    rows.push_back(std::move(cols));
    dense_rows.push_back(std::move(dense_vals));
  }

  const std::size_t n_cols = opt.sparse_feature_count ? opt.sparse_feature_count : (any_col ? max_col + 1 : 0);
  ds.sparse = SparseBinaryMatrix(n_cols, rows);
  if (opt.dense_feature_count > 0) {
    DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                      static_cast<Eigen::Index>(opt.dense_feature_count));
    for (std::size_t i = 0; i < dense_rows.size(); ++i)
      for (auto [f, v] : dense_rows[i]) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = v;
    ds.dense = std::move(d);
  }
  ds.validate();
  return ds;
}

inline Dataset read_svmlight(const std::string& path, const SvmlightOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_svmlight(in, path, opt);
}

inline Dataset read_svmlight(const std::string& path, std::size_t dense_feature_count, int index_base) {
  SvmlightOptions opt;
  opt.dense_feature_count = dense_feature_count;
  opt.index_base = index_base;
  return read_svmlight(path, opt);
}

/// Inverse of parse_svmlight: dense features first (zeros omitted), then the
/// sparse block shifted past them.
inline void write_svmlight(std::ostream& out, const Dataset& ds, int index_base = 1) {
  ds.validate();
  const std::size_t n_dense = ds.dense_feature_count();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    if (ds.dense)
      for (std::size_t f = 0; f < n_dense; ++f) {
        const double v = (*ds.dense)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
        if (v != 0.0) out << ' ' << (f + static_cast<std::size_t>(index_base)) << ':' << format_double(v);
      }
    for (auto c : ds.sparse.row(i)) out << ' ' << (c + n_dense + static_cast<std::size_t>(index_base)) << ":1";
    out << '\n';
  }
}

inline void write_svmlight(const std::string& path, const Dataset& ds, int index_base = 1) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_svmlight(out, ds, index_base);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline KeyValue dataset_metadata(const Dataset& ds) {
  KeyValue kv;
  kv.set("name", ds.name);
  kv.set("n_rows", ds.size());
  kv.set("n_sparse_features", ds.sparse.cols());
  kv.set("nnz", ds.sparse.nnz());
  kv.set("dense_feature_count", ds.dense_feature_count());
  return kv;
}

inline Dataset take_rows(const Dataset& ds, std::span<const std::size_t> idx) {
  Dataset out;
  out.name = ds.name;
  out.sparse = ds.sparse.select_rows(idx);
  if (ds.dense) out.dense = select_rows(*ds.dense, idx);
  for (auto i : idx) out.labels.push_back(ds.labels.at(i));
  return out;
}

/// n rows drawn without replacement, kept in original order.
inline Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  detail::require_param(n <= ds.size(), "subsample: more rows requested than available");
  const auto idx = sample_without_replacement(ds.size(), n, seed);
  return take_rows(ds, idx);
}

struct SplitSpec {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;

  void validate(std::size_t n) const {
    std::vector<char> seen(n, 0);
    for (const auto* part : {&train_indices, &test_indices})
      for (auto i : *part) {
        detail::require(i < n, "SplitSpec: index out of range");
        detail::require(!seen[i], "SplitSpec: train and test indices overlap");
        seen[i] = 1;
      }
  }
};

/// Seeded split with n_test held-out rows; both parts ascending.
inline SplitSpec make_split(std::size_t n, std::size_t n_test, std::uint64_t seed) {
  detail::require_param(n_test <= n, "make_split: test size exceeds the sample count");
  SplitSpec s;
  s.seed = seed;
  s.test_indices = sample_without_replacement(n, n_test, seed);
  for (std::size_t i = 0, t = 0; i < n; ++i) {
    if (t < s.test_indices.size() && s.test_indices[t] == i) {
      ++t;
      continue;
    }
    s.train_indices.push_back(i);
  }
  return s;
}

namespace detail {

// Active positions of an i.i.d. Bernoulli(p) process on [lo, hi), generated
// by geometric gaps.
inline void bernoulli_positions(std::size_t lo, std::size_t hi, double p, SplitMix64& rng,
                                std::vector<SparseBinaryMatrix::index_type>& out) {
  if (p <= 0.0 || lo >= hi) return;
  if (p >= 1.0) {
    for (std::size_t f = lo; f < hi; ++f) out.push_back(static_cast<SparseBinaryMatrix::index_type>(f));
    return;
  }
  const double log_q = std::log1p(-p);
  double pos = static_cast<double>(lo) - 1.0;
  for (;;) {
    const double gap = std::floor(std::log1p(-rng.uniform()) / log_q);
    pos += gap + 1.0;
    if (pos >= static_cast<double>(hi)) return;
    out.push_back(static_cast<SparseBinaryMatrix::index_type>(pos));
  }
}

}  // namespace detail

/// Balanced two-class synthetic sparse data. Background features fire at
/// `density`; the first `signal_features` fire at 4 * density for class +1 and
/// density / 4 for class -1. Labels are then flipped with probability flip_prob.
inline Dataset synth_generate(std::size_t n, std::size_t n_features, double density, std::size_t signal_features,
                              double flip_prob, std::uint64_t seed) {
  detail::require_param(n_features >= 1 && n_features <= UINT32_MAX, "synth_generate: invalid feature count");
  detail::require_param(signal_features <= n_features, "synth_generate: more signal features than features");
  detail::require_param(density > 0.0 && density <= 1.0, "synth_generate: density must lie in (0, 1]");
  detail::require_param(signal_features == 0 || 4.0 * density <= 1.0,
                        "synth_generate: signal rate 4 * density exceeds 1");
  detail::require_param(flip_prob >= 0.0 && flip_prob < 0.5, "synth_generate: flip_prob must lie in [0, 0.5)");

  const auto positives = sample_without_replacement(n, (n + 1) / 2, counter_hash(seed, 0, 0));
  Labels truth(n, -1);
  for (auto i : positives) truth[i] = 1;

  std::vector<std::vector<SparseBinaryMatrix::index_type>> rows(n);
  Dataset ds;
  ds.labels.resize(n);
  parallel_for(n, 64, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      SplitMix64 rng(counter_hash(seed, 1, i));
      const double signal_rate = truth[i] > 0 ? 4.0 * density : density / 4.0;
      detail::bernoulli_positions(0, signal_features, signal_rate, rng, rows[i]);
      detail::bernoulli_positions(signal_features, n_features, density, rng, rows[i]);
      const bool flip = to_unit(counter_hash(seed, 2, i)) < flip_prob;
      ds.labels[i] = flip ? -truth[i] : truth[i];
    }
  });
  ds.sparse = SparseBinaryMatrix(n_features, rows);
  ds.name = "synthetic";
  return ds;
}

}  // namespace srpelm

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srpelm/csv.hpp"
#include "srpelm/dataset.hpp"
#include "srpelm/diagnostics.hpp"
#include "srpelm/elm.hpp"
#include "srpelm/jaccard.hpp"
#include "srpelm/kernel.hpp"
#include "srpelm/keyvalue.hpp"
#include "srpelm/logreg.hpp"
#include "srpelm/metrics.hpp"
#include "srpelm/srp.hpp"

namespace srpelm {

enum class MethodType { elm, rvfl, rbf_srp, rbf_jaccard, krr_srp, krr_jaccard, knn_srp, knn_jaccard, logreg };

struct MethodInfo {
  MethodType type;
  const char* key;
  const char* display;
  bool uses_srp;
};

inline constexpr MethodInfo kMethods[] = {
    {MethodType::elm, "elm", "ELM, SRP", true},
    {MethodType::rvfl, "rvfl", "RVFL, SRP", true},
    {MethodType::rbf_srp, "rbf_srp", "RBF-ELM, SRP", true},
    {MethodType::krr_srp, "krr_srp", "KRR, SRP", true},
    {MethodType::knn_srp, "knn_srp", "kNN, SRP", true},
    {MethodType::logreg, "logreg", "Logistic Regression, SRP", true},
    {MethodType::rbf_jaccard, "rbf_jaccard", "RBF-ELM, Jaccard", false},
    {MethodType::krr_jaccard, "krr_jaccard", "KRR, Jaccard", false},
    {MethodType::knn_jaccard, "knn_jaccard", "kNN, Jaccard", false},
};

inline const MethodInfo& method_info(MethodType t) {
  for (const auto& m : kMethods)
    if (m.type == t) return m;
  throw ContractViolation("unknown method type");
}

inline MethodType method_type_from_string(const std::string& s) {
  for (const auto& m : kMethods)
    if (s == m.key) return m.type;
  throw ParameterError("unknown method type '" + s + "'");
}

struct MethodConfig {
  std::string name;
  MethodType type = MethodType::elm;
  std::size_t hidden = 1000;
  std::size_t linear_dim = 0;  // 0: min(input dim, hidden)
  double density = 0.0;        // 0: 1 / sqrt(input dim)
  std::size_t k = 1;
  std::size_t max_iter = 500;
  double tol = 1e-6;
};

struct SynthConfig {
  std::size_t n = 5000;
  std::size_t n_test = 1000;
  std::size_t features = 100000;
  double density = 1e-3;
  std::size_t signal_features = 500;
  double flip_prob = 0.05;
  std::uint64_t seed = 1;
};

/// Everything one benchmark or sweep needs. Parsed from key=value text with
/// per-method keys `method.<name>.<param>`.
struct RunConfig {
  // Data: either `synth.*`, or `train` + `test` svmlight files, or `data` +
  // `test_indices` (one held-out row index per line).
  std::optional<SynthConfig> synth;
  std::string train_path, test_path, data_path, test_indices_path;
  SvmlightOptions svmlight;
  // Precomputed projected features (CSV) replacing the in-process projection.
  std::string train_features, test_features;

  std::vector<MethodConfig> methods;
  std::size_t srp_dim = 5000;
  double srp_density = 0.0;  // 0: 1 / sqrt(D)
  std::optional<std::uint64_t> srp_seed;
  std::vector<std::size_t> sweep;
  std::size_t n_train = 1000;
  std::size_t n_runs = 100;
  std::uint64_t base_seed = 1;
  double alpha = 0.05;
  int lambda_lo_exp = -20;
  int lambda_hi_exp = 20;
  std::string output_dir = "out";

  std::uint64_t projection_seed() const { return srp_seed.value_or(base_seed); }
  std::uint64_t run_seed(std::size_t run) const { return base_seed + run; }
  std::uint64_t tuning_seed() const { return base_seed - 1; }
  std::vector<double> grid() const { return lambda_grid(lambda_lo_exp, lambda_hi_exp); }

  void validate() const {
    detail::require_param(!methods.empty(), "config: method list is empty");
    detail::require_param(n_runs >= 1, "config: n_runs must be at least 1");
    detail::require_param(n_train >= 1, "config: n_train must be at least 1");
    detail::require_param(srp_dim >= 1, "config: srp_dim must be at least 1");
    detail::require_param(srp_density >= 0.0 && srp_density <= 1.0, "config: srp_density must lie in [0, 1]");
    detail::require_param(alpha > 0.0 && alpha < 1.0, "config: alpha must lie in (0, 1)");
    for (std::size_t i = 1; i < sweep.size(); ++i)
      detail::require_param(sweep[i] > sweep[i - 1], "config: sweep list must be strictly increasing");
    for (auto d : sweep) detail::require_param(d >= 1, "config: sweep dimensions must be at least 1");
    const bool files = !train_path.empty() || !test_path.empty();
    const bool single = !data_path.empty();
    detail::require_param(int(synth.has_value()) + int(files) + int(single) == 1,
                          "config: specify exactly one data source (synth.*, train/test, or data/test_indices)");
    if (files) detail::require_param(!train_path.empty() && !test_path.empty(), "config: both train and test are required");
    if (single) detail::require_param(!test_indices_path.empty(), "config: data requires test_indices");
    detail::require_param(train_features.empty() == test_features.empty(),
                          "config: train_features and test_features go together");
    for (const auto& m : methods) {
      detail::require_param(m.hidden >= 1, "config: method " + m.name + ": hidden must be at least 1");
      detail::require_param(m.k % 2 == 1, "config: method " + m.name + ": k must be odd");
      detail::require_param(m.density >= 0.0 && m.density <= 1.0, "config: method " + m.name + ": density out of range");
    }
  }

  static std::vector<MethodConfig> default_methods(bool srp_only) {
    std::vector<MethodConfig> out;
    for (const auto& info : kMethods) {
      if (srp_only && !info.uses_srp) continue;
      MethodConfig m;
      m.name = info.key;
      m.type = info.type;
      out.push_back(m);
    }
    return out;
  }

  static RunConfig from_keyvalue(const KeyValue& kv, bool srp_only_default = false) {
    RunConfig c;
    auto size_of = [&](const std::string& key, std::size_t fallback) {
      const auto v = kv.get_int_or(key, static_cast<std::int64_t>(fallback));
      detail::require_param(v >= 0, "config: " + key + " must be non-negative");
      return static_cast<std::size_t>(v);
    };
    std::map<std::string, bool> known;
    auto mark = [&](const char* k) { known[k] = true; };
    for (const char* k : {"train", "test", "data", "test_indices", "index_base", "dense_features", "n_features",
                          "train_features", "test_features", "methods", "srp_dim", "srp_density", "srp_seed",
                          "sweep", "n_train", "n_runs", "base_seed", "alpha", "lambda_min_exp", "lambda_max_exp",
                          "output"})
      mark(k);

    c.train_path = kv.get_or("train", "");
    c.test_path = kv.get_or("test", "");
    c.data_path = kv.get_or("data", "");
    c.test_indices_path = kv.get_or("test_indices", "");
    c.svmlight.index_base = static_cast<int>(kv.get_int_or("index_base", 1));
    c.svmlight.dense_feature_count = size_of("dense_features", 0);
    c.svmlight.sparse_feature_count = size_of("n_features", 0);
    c.train_features = kv.get_or("train_features", "");
    c.test_features = kv.get_or("test_features", "");

    bool any_synth = false;
    SynthConfig s;
    for (const auto& key : kv.keys()) {
      if (key.rfind("synth.", 0) != 0) continue;
      any_synth = true;
      const std::string p = key.substr(6);
      if (p == "n") s.n = size_of(key, s.n);
      else if (p == "n_test") s.n_test = size_of(key, s.n_test);
      else if (p == "features") s.features = size_of(key, s.features);
      else if (p == "density") s.density = kv.get_double(key);
      else if (p == "signal_features") s.signal_features = size_of(key, s.signal_features);
      else if (p == "flip_prob") s.flip_prob = kv.get_double(key);
      else if (p == "seed") s.seed = kv.get_uint(key);
      else throw ParameterError("config: unknown key '" + key + "'");
    }
    if (any_synth) c.synth = s;

    c.srp_dim = size_of("srp_dim", c.srp_dim);
    c.srp_density = kv.get_double_or("srp_density", 0.0);
    if (kv.has("srp_seed")) c.srp_seed = kv.get_uint("srp_seed");
    if (kv.has("sweep"))
      for (const auto& part : split(kv.get("sweep"), ','))
        c.sweep.push_back(static_cast<std::size_t>(parse_int(part, "sweep")));
    c.n_train = size_of("n_train", c.n_train);
    c.n_runs = size_of("n_runs", c.n_runs);
    if (kv.has("base_seed")) c.base_seed = kv.get_uint("base_seed");
    c.alpha = kv.get_double_or("alpha", c.alpha);
    c.lambda_lo_exp = static_cast<int>(kv.get_int_or("lambda_min_exp", c.lambda_lo_exp));
    c.lambda_hi_exp = static_cast<int>(kv.get_int_or("lambda_max_exp", c.lambda_hi_exp));
    c.output_dir = kv.get_or("output", c.output_dir);

    // Method names: the explicit `methods` list, else the defaults followed
    // by any further names seen in method.<name>.* keys.
    std::vector<std::string> names;
    if (kv.has("methods")) {
      for (const auto& n : split(kv.get("methods"), ','))
        if (!n.empty()) names.push_back(n);
      detail::require_param(!names.empty(), "config: method list is empty");
    } else {
      for (const auto& m : default_methods(srp_only_default)) names.push_back(m.name);
      for (const auto& key : kv.keys()) {
        if (key.rfind("method.", 0) != 0) continue;
        const auto dot = key.find('.', 7);
        if (dot == std::string::npos) throw ParameterError("config: malformed key '" + key + "'");
        const std::string n = key.substr(7, dot - 7);
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
      }
    }
    for (const auto& n : names) {
      MethodConfig m;
      m.name = n;
      const std::string pre = "method." + n + ".";
      m.type = method_type_from_string(kv.get_or(pre + "type", n));
      m.hidden = size_of(pre + "hidden", m.hidden);
      m.linear_dim = size_of(pre + "linear_dim", m.linear_dim);
      m.density = kv.get_double_or(pre + "density", m.density);
      m.k = size_of(pre + "k", m.k);
      m.max_iter = size_of(pre + "max_iter", m.max_iter);
      m.tol = kv.get_double_or(pre + "tol", m.tol);
      c.methods.push_back(m);
    }
    for (const auto& key : kv.keys()) {
      if (key.rfind("synth.", 0) == 0) continue;
      if (key.rfind("method.", 0) == 0) {
        const auto dot = key.find('.', 7);
        const std::string n = key.substr(7, dot - 7);
        const std::string p = key.substr(dot + 1);
        if (std::find(names.begin(), names.end(), n) == names.end())
          throw ParameterError("config: '" + key + "' names a method not in the method list");
        static const char* params[] = {"type", "hidden", "linear_dim", "density", "k", "max_iter", "tol"};
        if (std::none_of(std::begin(params), std::end(params), [&](const char* q) { return p == q; }))
          throw ParameterError("config: unknown key '" + key + "'");
        continue;
      }
      if (!known.count(key)) throw ParameterError("config: unknown key '" + key + "'");
    }
    c.validate();
    return c;
  }

  static RunConfig read(const std::string& path, bool srp_only_default = false) {
    return from_keyvalue(KeyValue::read(path), srp_only_default);
  }
};

/// Log-uniform integer grid from 4 to 10,000 (13 points).
inline std::vector<std::size_t> default_sweep() {
  std::vector<std::size_t> out;
  const int points = 13;
  for (int i = 0; i < points; ++i) {
    const double v = 4.0 * std::pow(10000.0 / 4.0, static_cast<double>(i) / (points - 1));
    const auto d = static_cast<std::size_t>(std::llround(v));
    if (out.empty() || d > out.back()) out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data preparation

struct BenchData {
  Dataset pool;  // training pool that runs subsample from
  Dataset test;  // fixed test set
};

namespace detail {

inline std::vector<std::size_t> read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::size_t> idx;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      const auto v = parse_int(t, "index");
      if (v < 0) throw ParameterError("negative index");
      idx.push_back(static_cast<std::size_t>(v));
    } catch (const ParameterError& e) {
      throw IngestionError(path, lineno, e.what());
    }
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

inline void align_features(Dataset& a, Dataset& b) {
  const std::size_t d = std::max(a.sparse.cols(), b.sparse.cols());
  a.sparse = a.sparse.with_cols(d);
  b.sparse = b.sparse.with_cols(d);
}

}  // namespace detail

inline BenchData load_bench_data(const RunConfig& c) {
  BenchData d;
  if (c.synth) {
    const auto& s = *c.synth;
    detail::require_param(s.n_test < s.n, "config: synth.n_test must be smaller than synth.n");
    const Dataset all = synth_generate(s.n, s.features, s.density, s.signal_features, s.flip_prob, s.seed);
    const SplitSpec split = make_split(s.n, s.n_test, derive_seed(s.seed, 0x7e57));
    d.pool = take_rows(all, split.train_indices);
    d.test = take_rows(all, split.test_indices);
  } else if (!c.data_path.empty()) {
    const Dataset all = read_svmlight(c.data_path, c.svmlight);
    SplitSpec split;
    split.test_indices = detail::read_index_file(c.test_indices_path);
    for (auto i : split.test_indices)
      if (i >= all.size()) throw ParameterError("test_indices: index " + std::to_string(i) + " out of range");
    for (std::size_t i = 0, t = 0; i < all.size(); ++i) {
      if (t < split.test_indices.size() && split.test_indices[t] == i) {
        ++t;
        continue;
      }
      split.train_indices.push_back(i);
    }
    split.validate(all.size());
    d.pool = take_rows(all, split.train_indices);
    d.test = take_rows(all, split.test_indices);
  } else {
    d.pool = read_svmlight(c.train_path, c.svmlight);
    d.test = read_svmlight(c.test_path, c.svmlight);
    detail::align_features(d.pool, d.test);
  }
  detail::require_param(d.test.size() > 0, "bench: empty test set");
  detail::require_param(c.n_train <= d.pool.size(), "bench: n_train exceeds the training pool size");
  return d;
}

/// SRP features with the dense block (if any) appended.
inline DenseMatrix srp_features(const Dataset& ds, const SparseProjection& p) {
  DenseMatrix z = apply_projection(ds.sparse, p);
  if (!ds.dense) return z;
  DenseMatrix full(z.rows(), z.cols() + ds.dense->cols());
  full << z, *ds.dense;
  return full;
}

inline SparseProjection bench_projection(const RunConfig& c, std::size_t input_dim, std::size_t dim) {
  const double density = c.srp_density > 0.0 ? c.srp_density : default_density(input_dim);
  return make_projection(input_dim, dim, density, c.projection_seed());
}

// ---------------------------------------------------------------------------
// Single method evaluation

struct MethodOutcome {
  bool ok = false;
  std::string message;
  double auc = 0.0;
  double accuracy = 0.0;
  double seconds = 0.0;
  double lambda = 0.0;
  std::string detail;  // method-specific extras, e.g. logistic-regression convergence
  Vector scores;
};

struct Representation {
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
  const DenseMatrix* z_train = nullptr;  // SRP features; null when no SRP method runs
  const DenseMatrix* z_test = nullptr;
};

struct Tuning {
  std::map<std::string, double> logreg_lambda;  // by method name
};

inline MethodOutcome evaluate_method(const MethodConfig& m, const Representation& rep, std::uint64_t seed,
                                     const std::vector<double>& grid, const Tuning& tuning) {
  MethodOutcome out;
  const auto& info = method_info(m.type);
  const Labels& y = rep.train->labels;
  const auto density_for = [&](std::size_t input_dim) {
    return m.density > 0.0 ? m.density : default_density(input_dim);
  };
  const auto start = std::chrono::steady_clock::now();
  try {
    if (info.uses_srp) detail::require(rep.z_train && rep.z_test, "bench: SRP features missing");
    const std::size_t n = rep.train->size();
    double threshold = 0.0;
    switch (m.type) {
      case MethodType::elm: {
        const std::size_t d = static_cast<std::size_t>(rep.z_train->cols());
        auto model = elm_fit(*rep.z_train, y, m.hidden, density_for(d), seed, grid);
        out.scores = model_predict(model, *rep.z_test);
        out.lambda = model.solution.lambda;
        break;
      }
      case MethodType::rvfl: {
        const std::size_t d = static_cast<std::size_t>(rep.z_train->cols());
        const std::size_t lin = m.linear_dim ? m.linear_dim : std::min(d, m.hidden);
        auto model = rvfl_fit(*rep.z_train, y, m.hidden, lin, density_for(d), seed, grid);
        out.scores = model_predict(model, *rep.z_test);
        out.lambda = model.solution.lambda;
        break;
      }
      case MethodType::rbf_srp: {
        auto model = rbf_fit(*rep.z_train, y, std::min(m.hidden, n), DistanceKind::squared_euclidean, seed, grid);
        out.scores = model_predict(model, *rep.z_test);
        out.lambda = model.solution.lambda;
        break;
      }
      case MethodType::rbf_jaccard: {
        auto model = rbf_fit(rep.train->sparse, y, std::min(m.hidden, n), DistanceKind::jaccard, seed, grid);
        out.scores = model_predict(model, rep.test->sparse);
        out.lambda = model.solution.lambda;
        break;
      }
      case MethodType::krr_srp: {
        auto model = krr_fit(KernelKind::linear_srp, *rep.z_train, y, grid);
        out.scores = krr_predict(model, *rep.z_test);
        out.lambda = model.fit.lambda;
        break;
      }
      case MethodType::krr_jaccard: {
        auto model = krr_fit(KernelKind::jaccard_similarity, rep.train->sparse, y, grid);
        out.scores = krr_predict(model, rep.test->sparse);
        out.lambda = model.fit.lambda;
        break;
      }
      case MethodType::knn_srp: {
        auto model = knn_fit(*rep.z_train, y, m.k, DistanceKind::squared_euclidean);
        out.scores = knn_predict(model, *rep.z_test);
        break;
      }
      case MethodType::knn_jaccard: {
        auto model = knn_fit(rep.train->sparse, y, m.k, DistanceKind::jaccard);
        out.scores = knn_predict(model, rep.test->sparse);
        break;
      }
      case MethodType::logreg: {
        auto it = tuning.logreg_lambda.find(m.name);
        detail::require(it != tuning.logreg_lambda.end(), "bench: logistic regression was not tuned");
        auto model = logreg_fit(*rep.z_train, y, it->second, m.max_iter, m.tol);
        out.scores = logreg_predict(model, *rep.z_test);
        out.lambda = model.lambda;
        out.detail = "iterations=" + std::to_string(model.iterations) +
                     ";converged=" + (model.converged ? "1" : "0");
        threshold = 0.5;
        break;
      }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.scores.allFinite()) throw NumericalFailure("non-finite test scores", 0);
    out.auc = roc_auc(out.scores, rep.test->labels).value;
    out.accuracy = accuracy(out.scores, rep.test->labels, threshold);
    out.ok = true;
  } catch (const std::exception& e) {
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.ok = false;
    out.message = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment driver shared by bench and sweep

struct RunRecord {
  std::size_t dimension = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string method;
  MethodOutcome outcome;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::map<std::string, double> tuned_lambda;
  double srp_zero_fraction = 0.0;
};

/// Runs every configured method on n_runs seeded subsamples at one SRP dimension.
inline ExperimentResult run_experiment(const RunConfig& c, const BenchData& data, std::size_t dim,
                                       const DenseMatrix* pre_train = nullptr, const DenseMatrix* pre_test = nullptr) {
  ExperimentResult res;
  const auto grid = c.grid();
  const bool need_srp = std::any_of(c.methods.begin(), c.methods.end(),
                                    [](const MethodConfig& m) { return method_info(m.type).uses_srp; });
  DenseMatrix z_pool, z_test;
  if (need_srp) {
    if (pre_train) {
      detail::require_param(static_cast<std::size_t>(pre_train->rows()) == data.pool.size() &&
                                static_cast<std::size_t>(pre_test->rows()) == data.test.size(),
                            "bench: precomputed feature rows do not match the data");
      detail::require_param(pre_train->cols() == pre_test->cols(), "bench: precomputed feature widths differ");
      z_pool = *pre_train;
      z_test = *pre_test;
    } else {
      const auto p = bench_projection(c, data.pool.sparse.cols(), dim);
      z_pool = srp_features(data.pool, p);
      z_test = srp_features(data.test, p);
    }
    res.srp_zero_fraction = zero_fraction(z_pool);
  }

  auto subset = [&](std::uint64_t seed, Dataset& ds, DenseMatrix& z) {
    const auto idx = sample_without_replacement(data.pool.size(), c.n_train, seed);
    ds = take_rows(data.pool, idx);
    if (need_srp) z = select_rows(z_pool, idx);
  };

  Tuning tuning;
  {
    Dataset tune_ds;
    DenseMatrix tune_z;
    bool have = false;
    for (const auto& m : c.methods) {
      if (m.type != MethodType::logreg) continue;
      if (!have) {
        subset(c.tuning_seed(), tune_ds, tune_z);
        have = true;
      }
      try {
        const auto sel = logreg_select_lambda(tune_z, tune_ds.labels, grid, c.tuning_seed(), m.max_iter, m.tol);
        tuning.logreg_lambda[m.name] = sel.lambda;
        res.tuned_lambda[m.name] = sel.lambda;
      } catch (const std::exception& e) {
        warn("method " + m.name + ": lambda tuning failed: " + e.what());
      }
    }
  }

  for (std::size_t r = 0; r < c.n_runs; ++r) {
    const std::uint64_t seed = c.run_seed(r);
    Dataset train;
    DenseMatrix z_train;
    subset(seed, train, z_train);
    Representation rep{&train, &data.test, need_srp ? &z_train : nullptr, need_srp ? &z_test : nullptr};
    for (const auto& m : c.methods) {
      RunRecord rec{dim, r, seed, m.name, evaluate_method(m, rep, seed, grid, tuning)};
      if (!rec.outcome.ok) warn("run " + std::to_string(r) + ", method " + m.name + " failed: " + rec.outcome.message);
      res.records.push_back(std::move(rec));
    }
  }
  return res;
}

inline std::vector<MethodRuns> collect_runs(const RunConfig& c, const ExperimentResult& res) {
  std::vector<MethodRuns> out;
  for (const auto& m : c.methods) {
    MethodRuns mr;
    mr.name = m.name;
    for (const auto& rec : res.records) {
      if (rec.method != m.name) continue;
      if (!rec.outcome.ok) {
        ++mr.failures;
        continue;
      }
      mr.run_ids.push_back(rec.run);
      mr.aucs.push_back(rec.outcome.auc);
      mr.accuracies.push_back(rec.outcome.accuracy);
      mr.seconds.push_back(rec.outcome.seconds);
    }
    out.push_back(std::move(mr));
  }
  return out;
}

/// summarize() where every method has two or more runs; otherwise means only,
/// with the best-mean method as the sole best-set member.
inline EvalReport aggregate(const std::vector<MethodRuns>& runs, double alpha) {
  std::vector<MethodRuns> usable;
  for (const auto& r : runs)
    if (r.aucs.size() >= 2) usable.push_back(r);
  if (usable.size() == runs.size() && !runs.empty()) return summarize(runs, alpha);
  EvalReport rep;
  rep.alpha = alpha;
  const auto m = static_cast<Eigen::Index>(runs.size());
  rep.p_values = DenseMatrix::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < m; ++i) rep.p_values(i, i) = 1.0;
  bool have_best = false;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    MethodSummary s;
    s.name = r.name;
    s.auc_mean = detail::mean_of(r.aucs);
    s.auc_std = detail::sample_std(r.aucs);
    s.accuracy_mean = detail::mean_of(r.accuracies);
    s.accuracy_std = detail::sample_std(r.accuracies);
    s.time_mean_s = detail::mean_of(r.seconds);
    s.runs = r.aucs.size();
    s.failures = r.failures;
    s.run_aucs = r.aucs;
    if (!r.aucs.empty() && (!have_best || s.auc_mean > rep.methods[rep.best].auc_mean)) {
      rep.best = i;
      have_best = true;
    }
    rep.methods.push_back(std::move(s));
  }
  if (have_best) rep.methods[rep.best].in_best_set = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

inline std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline const MethodConfig& find_method(const RunConfig& c, const std::string& name) {
  for (const auto& m : c.methods)
    if (m.name == name) return m;
  throw ContractViolation("unknown method " + name);
}

}  // namespace detail

/// Aligned text table: AUC mean (std) in percent, accuracy, mean time; '*'
/// marks methods not significantly worse than the best.
inline std::string format_report(const RunConfig& c, const EvalReport& rep, const ExperimentResult& res) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-20s %-14s %9s\n", "Method", "AUC (std.), %", "accuracy, %", "time, s");
  out << line << std::string(74, '-') << '\n';
  for (const auto& s : rep.methods) {
    const auto& mc = detail::find_method(c, s.name);
    std::string auc = detail::fixed(100.0 * s.auc_mean, 2) + " (" + detail::fixed(100.0 * s.auc_std, 2) + ")";
    if (s.runs == 0) auc = "failed";
    std::snprintf(line, sizeof line, "%-26s %c %-20s %-14s %9s\n",
                  (std::string(method_info(mc.type).display) + (mc.name != method_info(mc.type).key ? " [" + mc.name + "]" : "")).c_str(),
                  s.in_best_set ? '*' : ' ', auc.c_str(), detail::fixed(100.0 * s.accuracy_mean, 2).c_str(),
                  detail::fixed(s.time_mean_s, 1).c_str());
    out << line;
  }
  out << std::string(74, '-') << '\n';
  out << "* best mean AUC and methods not significantly different (paired t-test, alpha = "
      << format_double(rep.alpha) << ")\n";
  std::size_t runs = 0;
  for (const auto& s : rep.methods) runs = std::max(runs, s.runs + s.failures);
  out << "runs: " << runs << ", training samples per run: " << c.n_train << '\n';
  for (const auto& s : rep.methods)
    if (s.failures) out << "method " << s.name << ": " << s.failures << " failed run(s) excluded\n";
  for (const auto& [name, lambda] : res.tuned_lambda) {
    std::size_t conv = 0, total = 0, iters = 0;
    for (const auto& r : res.records) {
      if (r.method != name || !r.outcome.ok) continue;
      ++total;
      conv += r.outcome.detail.find("converged=1") != std::string::npos;
      const auto p = r.outcome.detail.find("iterations=");
      if (p != std::string::npos) iters += std::stoul(r.outcome.detail.substr(p + 11));
    }
    out << "method " << name << ": lambda " << format_double(lambda) << " (validated), converged " << conv << "/"
        << total << ", mean iterations " << (total ? detail::fixed(double(iters) / double(total), 1) : "n/a") << '\n';
  }
  return out.str();
}

inline void write_runs_csv(std::ostream& out, const ExperimentResult& res, bool with_dimension) {
  out << (with_dimension ? "dimension,run,seed,method,status,auc,accuracy,lambda,detail\n"
                         : "run,seed,method,status,auc,accuracy,lambda,detail\n");
  for (const auto& r : res.records) {
    if (with_dimension) out << r.dimension << ',';
    out << r.run << ',' << r.seed << ',' << r.method << ',' << (r.outcome.ok ? "ok" : "failed") << ',';
    if (r.outcome.ok)
      out << format_double(r.outcome.auc) << ',' << format_double(r.outcome.accuracy) << ','
          << format_double(r.outcome.lambda) << ',' << detail::csv_field(r.outcome.detail);
    else
      out << ",,," << detail::csv_field(r.outcome.message);
    out << '\n';
  }
}

inline void write_timings_csv(std::ostream& out, const ExperimentResult& res, bool with_dimension) {
  out << (with_dimension ? "dimension,run,method,seconds\n" : "run,method,seconds\n");
  for (const auto& r : res.records) {
    if (with_dimension) out << r.dimension << ',';
    out << r.run << ',' << r.method << ',' << detail::fixed(r.outcome.seconds, 6) << '\n';
  }
}

/// Header plus rows of a CSV file as written by this harness (fields may be
/// double-quoted with "" escapes).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParameterError("csv: no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  auto fields = [&](const std::string& line, std::size_t lineno) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          out.back() += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        out.emplace_back();
      } else {
        out.back() += ch;
      }
    }
    if (quoted) throw IngestionError(path, lineno, "unterminated quoted field");
    return out;
  };
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = fields(line, lineno);
    if (t.header.empty()) {
      t.header = std::move(f);
      continue;
    }
    if (f.size() != t.header.size())
      throw IngestionError(path, lineno, "expected " + std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(f));
  }
  return t;
}

struct BenchResult {
  EvalReport report;
  ExperimentResult experiment;
  std::string report_text;
};

namespace detail {

inline std::pair<DenseMatrix, DenseMatrix> load_precomputed(const RunConfig& c) {
  return {read_dense_csv(c.train_features), read_dense_csv(c.test_features)};
}

}  // namespace detail

/// Repeated-subsample benchmark at config.srp_dim. Writes runs.csv,
/// summary.csv, pvalues.csv and roc.csv (all deterministic in the seeds),
/// plus timings.csv and report.txt.
inline BenchResult cmd_bench(const RunConfig& c) {
  c.validate();
  const BenchData data = load_bench_data(c);
  std::optional<std::pair<DenseMatrix, DenseMatrix>> pre;
  if (!c.train_features.empty()) pre = detail::load_precomputed(c);
  BenchResult br;
  br.experiment = run_experiment(c, data, c.srp_dim, pre ? &pre->first : nullptr, pre ? &pre->second : nullptr);
  br.report = aggregate(collect_runs(c, br.experiment), c.alpha);
  br.report_text = format_report(c, br.report, br.experiment);

  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / "runs.csv");
    write_runs_csv(out, br.experiment, false);
  }
  {
    auto out = detail::open_out(dir / "timings.csv");
    write_timings_csv(out, br.experiment, false);
  }
  {
    auto out = detail::open_out(dir / "summary.csv");
    out << "method,display_name,runs,failures,auc_mean,auc_std,accuracy_mean,accuracy_std,in_best_set\n";
    for (const auto& s : br.report.methods) {
      const auto& mc = detail::find_method(c, s.name);
      out << s.name << ',' << detail::csv_field(method_info(mc.type).display) << ',' << s.runs << ',' << s.failures
          << ',' << format_double(s.auc_mean) << ',' << format_double(s.auc_std) << ','
          << format_double(s.accuracy_mean) << ',' << format_double(s.accuracy_std) << ','
          << (s.in_best_set ? 1 : 0) << '\n';
    }
  }
  {
    auto out = detail::open_out(dir / "pvalues.csv");
    out << "method";
    for (const auto& s : br.report.methods) out << ',' << s.name;
    out << '\n';
    for (std::size_t i = 0; i < br.report.methods.size(); ++i) {
      out << br.report.methods[i].name;
      for (std::size_t j = 0; j < br.report.methods.size(); ++j)
        out << ',' << format_double(br.report.p_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out << '\n';
    }
  }
  {
    auto out = detail::open_out(dir / "roc.csv");
    out << "method,fpr,tpr\n";
    for (const auto& r : br.experiment.records) {
      if (r.run != 0 || !r.outcome.ok) continue;
      const auto& s = r.outcome.scores;
      for (auto [fpr, tpr] : roc_curve(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), data.test.labels))
        out << r.method << ',' << format_double(fpr) << ',' << format_double(tpr) << '\n';
    }
  }
  {
    auto out = detail::open_out(dir / "report.txt");
    out << br.report_text;
  }
  return br;
}

struct SweepResult {
  std::vector<ExperimentResult> per_dimension;
  std::vector<std::size_t> dimensions;
};

/// One experiment per SRP dimension (config.sweep, or the default grid).
/// Writes sweep.csv (deterministic) and sweep_timings.csv.
inline SweepResult cmd_sweep(const RunConfig& c) {
  c.validate();
  detail::require_param(c.train_features.empty(), "sweep: precomputed features cannot be swept");
  const BenchData data = load_bench_data(c);
  SweepResult sr;
  sr.dimensions = c.sweep.empty() ? default_sweep() : c.sweep;
  for (auto d : sr.dimensions) sr.per_dimension.push_back(run_experiment(c, data, d));

  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / "sweep.csv");
    out << "dimension,run,seed,method,status,auc,accuracy,lambda,detail\n";
    for (const auto& e : sr.per_dimension) {
      std::ostringstream body;
      write_runs_csv(body, e, true);
      const std::string s = body.str();
      out << s.substr(s.find('\n') + 1);
    }
  }
  {
    auto out = detail::open_out(dir / "sweep_timings.csv");
    out << "dimension,run,method,seconds\n";
    for (const auto& e : sr.per_dimension) {
      std::ostringstream body;
      write_timings_csv(body, e, true);
      const std::string s = body.str();
      out << s.substr(s.find('\n') + 1);
    }
  }
  return sr;
}

// ---------------------------------------------------------------------------
// Standalone projection and distance commands

struct ProjectOptions {
  std::string input;
  std::string output;
  std::size_t dim = 0;
  double density = 0.0;  // 0: 1 / sqrt(D)
  std::uint64_t seed = 0;
  SvmlightOptions svmlight;
};

/// Writes the N x d projected features (dense block appended) as CSV and the
/// projection sidecar `<output>.meta`. Returns the projection used.
inline SparseProjection cmd_project(const ProjectOptions& o) {
  detail::require_param(o.dim >= 1, "project: --dim must be at least 1");
  const Dataset ds = read_svmlight(o.input, o.svmlight);
  detail::require_param(ds.sparse.cols() >= 1, "project: input has no sparse features");
  const double density = o.density > 0.0 ? o.density : default_density(ds.sparse.cols());
  const auto p = make_projection(ds.sparse.cols(), o.dim, density, o.seed);
  const DenseMatrix z = srp_features(ds, p);
  write_dense_csv(o.output, z);
  KeyValue meta = projection_metadata(p);
  meta.set("dense_features", ds.dense_feature_count());
  meta.set("rows", ds.size());
  meta.set("zero_fraction", zero_fraction(z));
  meta.write(o.output + ".meta");
  return p;
}

struct DistancesOptions {
  std::string a, b, output;
  SvmlightOptions svmlight;
};

namespace detail {

// Declared sparse width from a `<file>.meta` dataset sidecar, if present.
inline std::optional<std::size_t> declared_width(const std::string& path) {
  if (!std::filesystem::exists(path + ".meta")) return std::nullopt;
  const KeyValue kv = KeyValue::read(path + ".meta");
  if (!kv.has("n_sparse_features")) return std::nullopt;
  return static_cast<std::size_t>(kv.get_uint("n_sparse_features"));
}

}  // namespace detail

/// Full Jaccard distance matrix between the sparse blocks of two svmlight
/// files, as CSV. Widths declared by dataset sidecars must agree; otherwise
/// both inputs share the larger inferred width.
inline DistanceMatrix cmd_distances(const DistancesOptions& o) {
  const auto wa = detail::declared_width(o.a);
  const auto wb = detail::declared_width(o.b);
  if (wa && wb && *wa != *wb)
    throw ParameterError("distances: feature dimensions differ (" + std::to_string(*wa) + " vs " +
                         std::to_string(*wb) + ")");
  SvmlightOptions so = o.svmlight;
  if (wa || wb) so.sparse_feature_count = wa ? *wa : *wb;
  Dataset a = read_svmlight(o.a, so);
  Dataset b = read_svmlight(o.b, so);
  if (a.sparse.cols() != b.sparse.cols()) detail::align_features(a, b);
  DistanceMatrix d = jaccard_distance_matrix(a.sparse, b.sparse);
  write_dense_csv(o.output, d.values);
  return d;
}

}  // namespace srpelm

#pragma once

#include <string>
#include <vector>

#include "srpelm/csv.hpp"
#include "srpelm/elm.hpp"
#include "srpelm/kernel.hpp"
#include "srpelm/keyvalue.hpp"
#include "srpelm/logreg.hpp"

// Models are stored as <prefix>.meta (key=value) plus CSV/row files next to
// it. Numbers use shortest round-trip formatting, so a reloaded model scores
// bit-for-bit like the original. Random hidden layers are regenerated from
// their seeds rather than stored.

namespace srpelm {

namespace detail {

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector to_eigen(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline void expect_type(const KeyValue& kv, const std::string& type) {
  if (kv.get("type") != type) throw ParameterError("model file holds '" + kv.get("type") + "', expected '" + type + "'");
}

inline void put_solution(KeyValue& kv, const RidgeSolution& s) {
  kv.set("lambda", s.lambda);
  kv.set("press", s.press);
  kv.set("lambda_grid", join_doubles(s.lambda_grid));
}

inline RidgeSolution get_solution(const KeyValue& kv, const std::string& prefix) {
  RidgeSolution s;
  s.lambda = kv.get_double("lambda");
  s.press = kv.get_double("press");
  s.lambda_grid = split_doubles(kv.get("lambda_grid"), "lambda_grid");
  s.beta = read_dense_csv(prefix + ".beta.csv");
  return s;
}

template <FeatureMatrix X>
constexpr const char* feature_tag() {
  return std::same_as<X, SparseBinaryMatrix> ? "sparse" : "dense";
}

template <FeatureMatrix X>
void write_rows(const std::string& path, const X& x) {
  if constexpr (std::same_as<X, SparseBinaryMatrix>)
    write_sparse_rows(path, x);
  else
    write_dense_csv(path, x);
}

template <FeatureMatrix X>
X read_rows(const std::string& path) {
  if constexpr (std::same_as<X, SparseBinaryMatrix>)
    return read_sparse_rows(path);
  else
    return read_dense_csv(path);
}

}  // namespace detail

inline void save_model(const ElmModel& m, const std::string& prefix) {
  KeyValue kv;
  kv.set("type", m.linear_part ? "rvfl" : "elm");
  kv.set("activation", "tanh");
  kv.set("input_dim", m.input_dim());
  kv.set("hidden_width", m.width());
  kv.set("density", m.hidden.density());
  kv.set("seed", m.seed);
  kv.set("hidden_seed", m.hidden.seed());
  kv.set("bias", join_doubles(detail::to_std(m.bias)));
  if (m.linear_part) {
    kv.set("linear_dim", m.linear_part->output_dim());
    kv.set("linear_density", m.linear_part->density());
    kv.set("linear_seed", m.linear_part->seed());
  }
  detail::put_solution(kv, m.solution);
  kv.write(prefix + ".meta");
  write_dense_csv(prefix + ".beta.csv", m.solution.beta);
}

inline ElmModel load_elm_model(const std::string& prefix) {
  const KeyValue kv = KeyValue::read(prefix + ".meta");
  const std::string type = kv.get("type");
  if (type != "elm" && type != "rvfl") throw ParameterError("model file holds '" + type + "', expected elm or rvfl");
  ElmModel m;
  m.seed = kv.get_uint("seed");
  const auto d = static_cast<std::size_t>(kv.get_uint("input_dim"));
  m.hidden = make_projection(d, static_cast<std::size_t>(kv.get_uint("hidden_width")), kv.get_double("density"),
                             kv.get_uint("hidden_seed"));
  m.bias = detail::to_eigen(split_doubles(kv.get("bias"), "bias"));
  if (type == "rvfl")
    m.linear_part = make_projection(d, static_cast<std::size_t>(kv.get_uint("linear_dim")),
                                    kv.get_double("linear_density"), kv.get_uint("linear_seed"));
  m.solution = detail::get_solution(kv, prefix);
  return m;
}

template <FeatureMatrix X>
void save_model(const RbfModel<X>& m, const std::string& prefix) {
  KeyValue kv;
  kv.set("type", "rbf");
  kv.set("features", detail::feature_tag<X>());
  kv.set("distance_kind", to_string(m.distance_kind));
  kv.set("hidden_width", m.width());
  kv.set("seed", m.seed);
  kv.set("median_distance", m.median_distance);
  kv.set("gammas", join_doubles(detail::to_std(m.gammas)));
  detail::put_solution(kv, m.solution);
  kv.write(prefix + ".meta");
  write_dense_csv(prefix + ".beta.csv", m.solution.beta);
  detail::write_rows(prefix + ".centroids", m.centroids);
}

template <FeatureMatrix X>
RbfModel<X> load_rbf_model(const std::string& prefix) {
  const KeyValue kv = KeyValue::read(prefix + ".meta");
  detail::expect_type(kv, "rbf");
  if (kv.get("features") != detail::feature_tag<X>()) throw ParameterError("rbf model stores other feature kind");
  RbfModel<X> m;
  m.distance_kind = distance_kind_from_string(kv.get("distance_kind"));
  m.seed = kv.get_uint("seed");
  m.median_distance = kv.get_double("median_distance");
  m.gammas = detail::to_eigen(split_doubles(kv.get("gammas"), "gammas"));
  m.solution = detail::get_solution(kv, prefix);
  m.centroids = detail::read_rows<X>(prefix + ".centroids");
  return m;
}

template <FeatureMatrix X>
void save_model(const KrrModel<X>& m, const std::string& prefix) {
  KeyValue kv;
  kv.set("type", "krr");
  kv.set("features", detail::feature_tag<X>());
  kv.set("kernel_kind", to_string(m.kernel_kind));
  kv.set("lambda", m.fit.lambda);
  kv.set("press", m.fit.press);
  kv.set("lambda_grid", join_doubles(m.fit.lambda_grid));
  kv.write(prefix + ".meta");
  write_dense_csv(prefix + ".alpha.csv", DenseMatrix(m.fit.alpha));
  detail::write_rows(prefix + ".train", m.train);
}

template <FeatureMatrix X>
KrrModel<X> load_krr_model(const std::string& prefix) {
  const KeyValue kv = KeyValue::read(prefix + ".meta");
  detail::expect_type(kv, "krr");
  if (kv.get("features") != detail::feature_tag<X>()) throw ParameterError("krr model stores other feature kind");
  KrrModel<X> m;
  m.kernel_kind = kernel_kind_from_string(kv.get("kernel_kind"));
  m.fit.lambda = kv.get_double("lambda");
  m.fit.press = kv.get_double("press");
  m.fit.lambda_grid = split_doubles(kv.get("lambda_grid"), "lambda_grid");
  m.fit.alpha = read_dense_csv(prefix + ".alpha.csv").col(0);
  m.train = detail::read_rows<X>(prefix + ".train");
  return m;
}

template <FeatureMatrix X>
void save_model(const KnnModel<X>& m, const std::string& prefix) {
  KeyValue kv;
  kv.set("type", "knn");
  kv.set("features", detail::feature_tag<X>());
  kv.set("distance_kind", to_string(m.distance_kind));
  kv.set("k", m.k);
  kv.write(prefix + ".meta");
  DenseMatrix labels(static_cast<Eigen::Index>(m.labels.size()), 1);
  for (std::size_t i = 0; i < m.labels.size(); ++i) labels(static_cast<Eigen::Index>(i), 0) = m.labels[i];
  write_dense_csv(prefix + ".labels.csv", labels);
  detail::write_rows(prefix + ".train", m.train);
}

template <FeatureMatrix X>
KnnModel<X> load_knn_model(const std::string& prefix) {
  const KeyValue kv = KeyValue::read(prefix + ".meta");
  detail::expect_type(kv, "knn");
  if (kv.get("features") != detail::feature_tag<X>()) throw ParameterError("knn model stores other feature kind");
  KnnModel<X> m;
  m.distance_kind = distance_kind_from_string(kv.get("distance_kind"));
  m.k = static_cast<std::size_t>(kv.get_uint("k"));
  const DenseMatrix labels = read_dense_csv(prefix + ".labels.csv");
  for (Eigen::Index i = 0; i < labels.rows(); ++i) m.labels.push_back(static_cast<int>(labels(i, 0)));
  m.train = detail::read_rows<X>(prefix + ".train");
  return m;
}

inline void save_model(const LogRegModel& m, const std::string& prefix) {
  KeyValue kv;
  kv.set("type", "logreg");
  kv.set("lambda", m.lambda);
  kv.set("intercept", m.intercept);
  kv.set("converged", m.converged ? "true" : "false");
  kv.set("iterations", m.iterations);
  kv.write(prefix + ".meta");
  write_dense_csv(prefix + ".weights.csv", DenseMatrix(m.weights));
}

inline LogRegModel load_logreg_model(const std::string& prefix) {
  const KeyValue kv = KeyValue::read(prefix + ".meta");
  detail::expect_type(kv, "logreg");
  LogRegModel m;
  m.lambda = kv.get_double("lambda");
  m.intercept = kv.get_double("intercept");
  m.converged = kv.get("converged") == "true";
  m.iterations = static_cast<std::size_t>(kv.get_uint("iterations"));
  m.weights = read_dense_csv(prefix + ".weights.csv").col(0);
  return m;
}

}  // namespace srpelm

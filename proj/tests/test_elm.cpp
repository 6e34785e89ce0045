#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "srpelm/dataset.hpp"
#include "srpelm/elm.hpp"
#include "srpelm/metrics.hpp"
#include "test_util.hpp"

using namespace srpelm;

TEST(ElmHidden, ZeroRowGivesZeroActivations) {
  const auto w = make_projection(8, 5, 0.5, 1);
  const DenseMatrix h = elm_hidden(SparseBinaryMatrix(8, {{}}), w, Vector::Zero(5));
  EXPECT_EQ(h, DenseMatrix::Zero(1, 5));
}

TEST(ElmHidden, SingleTermActivation) {
  // Density 1 and D = 1: every column has the one weight +-1/sqrt(d).
  const auto w = make_projection(1, 3, 1.0, 2);
  Vector b(3);
  b << 0.1, -0.2, 0.3;
  DenseMatrix x(2, 1);
  x << 1.5, -0.5;
  const DenseMatrix wd = w.to_dense();
  const DenseMatrix h = elm_hidden(x, w, b);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(h(i, j), std::tanh(x(i, 0) * wd(0, j) + b(j)));
}

TEST(ElmHidden, MatchesDenseOracleAndOpenInterval) {
  std::mt19937_64 rng(41);
  const auto x = testutil::random_sparse(30, 200, 0.05, rng);
  const auto w = make_projection(200, 40, 0.1, 3);
  const Vector b = ternary_bias(40, 0.1, 4);
  const DenseMatrix h = elm_hidden(x, w, b);
  const DenseMatrix lin = testutil::naive_product(x.to_dense(), w.to_dense());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      EXPECT_NEAR(h(i, j), std::tanh(lin(i, j) + b(j)), 1e-10);
      EXPECT_LT(std::abs(h(i, j)), 1.0);
    }
}

TEST(ElmHidden, DimensionMismatch) {
  const auto w = make_projection(8, 5, 0.5, 1);
  EXPECT_THROW(elm_hidden(SparseBinaryMatrix(9, {{}}), w, Vector::Zero(5)), ContractViolation);
}

TEST(TernaryBias, SameDistributionAsWeights) {
  const Vector b = ternary_bias(20000, 0.25, 5);
  const double scale = std::sqrt(4.0 / 20000.0);
  std::size_t nz = 0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b(j) == 0.0) continue;
    ++nz;
    EXPECT_DOUBLE_EQ(std::abs(b(j)), scale);
  }
  EXPECT_LE(std::abs(double(nz) - 5000.0), 4 * std::sqrt(20000 * 0.25 * 0.75));
}

TEST(ElmFit, SeparableDataTrainingAuc) {
  const Dataset ds = synth_generate(500, 1000, 0.02, 1000, 0.0, 7);
  const auto m = elm_fit(ds.sparse, ds.labels, 300, default_density(1000), 11);
  EXPECT_GT(roc_auc(model_predict(m, ds.sparse), ds.labels).value, 0.99);
  EXPECT_EQ(static_cast<std::size_t>(m.solution.beta.rows()), m.width());
}

TEST(ElmFit, ConstantLabels) {
  std::mt19937_64 rng(42);
  const auto x = testutil::random_sparse(60, 50, 0.1, rng);
  const Labels y(60, 1);
  const auto m = elm_fit(x, y, 20, 0.2, 3);
  const Vector s = model_predict(m, x);
  EXPECT_LE(s.maxCoeff() - s.minCoeff(), 1e-8 * std::max(1.0, s.cwiseAbs().maxCoeff()) + 1e-8);
  const auto auc = roc_auc(s, y);
  EXPECT_EQ(auc.value, 0.5);
  EXPECT_TRUE(auc.degenerate);
}

TEST(ElmFit, Deterministic) {
  std::mt19937_64 rng(43);
  const auto x = testutil::random_sparse(80, 60, 0.1, rng);
  const auto y = testutil::random_labels(80, rng);
  const auto a = elm_fit(x, y, 30, 0.2, 5);
  const auto b = elm_fit(x, y, 30, 0.2, 5);
  EXPECT_EQ(a.solution.beta, b.solution.beta);
  auto threaded = [&] { return elm_fit(x, y, 30, 0.2, 5).solution.beta; };
  EXPECT_EQ(testutil::with_threads("1", threaded), testutil::with_threads("3", threaded));
}

TEST(ElmFit, Errors) {
  const SparseBinaryMatrix x(4, {{0}, {1}});
  EXPECT_THROW(elm_fit(x, Labels{1, -1}, 0, 0.5, 1), ParameterError);
  EXPECT_THROW(elm_fit(x, Labels{1, 2}, 3, 0.5, 1), ContractViolation);
  EXPECT_THROW(elm_fit(SparseBinaryMatrix(4, std::vector<std::vector<std::uint32_t>>{}), Labels{}, 3, 0.5, 1),
               ContractViolation);
}

TEST(RvflFit, LinearTargetPressNoWorseThanElm) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const DenseMatrix x = testutil::random_dense(120, 10, rng);
    const Vector w = testutil::random_dense(10, 1, rng).col(0);
    Labels y(120);
    for (Eigen::Index i = 0; i < 120; ++i) y[i] = x.row(i).dot(w) > 0 ? 1 : -1;
    const double density = default_density(10);
    const auto elm = elm_fit(x, y, 10, density, seed);
    const auto rvfl = rvfl_fit(x, y, 10, 10, density, seed);
    wins += rvfl.solution.press <= elm.solution.press;
  }
  EXPECT_GE(wins, 80);
}

TEST(RvflFit, DesignWidthAndErrors) {
  std::mt19937_64 rng(44);
  const auto x = testutil::random_sparse(50, 40, 0.2, rng);
  const auto y = testutil::random_labels(50, rng);
  EXPECT_THROW(rvfl_fit(x, y, 10, 0, 0.2, 1), ParameterError);
  const auto m = rvfl_fit(x, y, 10, 7, 0.2, 1);
  EXPECT_EQ(m.solution.beta.rows(), 17);
  const auto again = rvfl_fit(x, y, 10, 7, 0.2, 1);
  EXPECT_EQ(m.solution.beta, again.solution.beta);
  EXPECT_TRUE(*m.linear_part == *again.linear_part);
}

TEST(RbfFit, CentroidGivesUnitActivation) {
  std::mt19937_64 rng(45);
  const auto x = testutil::random_sparse(40, 30, 0.2, rng);
  const auto y = testutil::random_labels(40, rng);
  const auto m = rbf_fit(x, y, 10, DistanceKind::jaccard, 2);
  const DenseMatrix h = rbf_hidden(m.centroids, m.centroids, m.gammas, m.distance_kind);
  for (Eigen::Index j = 0; j < 10; ++j) EXPECT_EQ(h(j, j), 1.0);
  for (Eigen::Index j = 0; j < m.gammas.size(); ++j) EXPECT_GT(m.gammas(j), 0.0);
  EXPECT_EQ(m.width(), 10u);
}

TEST(RbfFit, LargeWidthLimitIsNearIdentity) {
  const DenseMatrix c = (DenseMatrix(3, 2) << 0, 0, 1, 0, 0, 1).finished();
  const Vector g = Vector::Constant(3, 1e3);
  const DenseMatrix h = rbf_hidden(c, c, g, DistanceKind::squared_euclidean);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (i == j) EXPECT_EQ(h(i, j), 1.0);
      else EXPECT_LT(h(i, j), 1e-6);
    }
}

TEST(RbfFit, GammaRuleFromMedianDistance) {
  std::mt19937_64 rng(46);
  const DenseMatrix x = testutil::random_dense(50, 4, rng);
  const auto y = testutil::random_labels(50, rng);
  const auto m = rbf_fit(x, y, 12, DistanceKind::squared_euclidean, 9);
  std::vector<double> d;
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = i + 1; j < 12; ++j) d.push_back((m.centroids.row(i) - m.centroids.row(j)).norm());
  std::sort(d.begin(), d.end());
  const double med = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  EXPECT_NEAR(m.median_distance, med, 1e-12);
  for (Eigen::Index j = 0; j < 12; ++j) {
    const double g = m.gammas(j) * med * med;
    EXPECT_GE(g, 0.1 * (1 - 1e-12));
    EXPECT_LE(g, 10.0 * (1 + 1e-12));
  }
}

TEST(RbfFit, Errors) {
  std::mt19937_64 rng(47);
  const auto x = testutil::random_sparse(5, 10, 0.3, rng);
  const auto y = testutil::random_labels(5, rng);
  EXPECT_THROW(rbf_fit(x, y, 6, DistanceKind::jaccard, 1), ParameterError);
  const DenseMatrix xd = x.to_dense();
  EXPECT_THROW(rbf_fit(xd, y, 3, DistanceKind::jaccard, 1), ParameterError);
}

TEST(RbfFit, IdenticalCentroidsWarnAndFallBack) {
  const SparseBinaryMatrix x(4, {{1, 2}, {1, 2}, {1, 2}, {1, 2}});
  const Labels y{1, -1, 1, -1};
  std::vector<std::string> seen;
  auto old = set_warning_sink([&](const std::string& s) { seen.push_back(s); });
  const auto m = rbf_fit(x, y, 3, DistanceKind::jaccard, 1);
  set_warning_sink(old);
  EXPECT_EQ(m.median_distance, 1.0);
  EXPECT_EQ(seen.size(), 1u);
}

TEST(RbfFit, JaccardEndToEndAndThreadStable) {
  const Dataset ds = synth_generate(1000, 2000, 0.01, 200, 0.05, 3);
  const Dataset test = synth_generate(300, 2000, 0.01, 200, 0.05, 4);
  auto run = [&] {
    const auto m = rbf_fit(ds.sparse, ds.labels, 200, DistanceKind::jaccard, 6);
    return Vector(model_predict(m, test.sparse));
  };
  const Vector a = testutil::with_threads("1", run);
  const Vector b = testutil::with_threads("4", run);
  EXPECT_EQ(a, b);
  const double auc = roc_auc(a, test.labels).value;
  EXPECT_GE(auc, 0.5);
  EXPECT_LE(auc, 1.0);
}

TEST(ModelPredict, TrainingFitEmptyAndBatching) {
  std::mt19937_64 rng(48);
  const auto x = testutil::random_sparse(60, 50, 0.1, rng);
  const auto y = testutil::random_labels(60, rng);
  const auto m = elm_fit(x, y, 25, 0.2, 8);
  const Vector s = model_predict(m, x);
  const Vector fitted = elm_design(m, x) * m.solution.beta.col(0);
  EXPECT_LE((s - fitted).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(model_predict(m, SparseBinaryMatrix(50, std::vector<std::vector<std::uint32_t>>{})).size(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::vector<std::size_t> one{i};
    EXPECT_NEAR(model_predict(m, x.select_rows(one))(0), s(static_cast<Eigen::Index>(i)), 1e-10);
  }
  const auto r = rbf_fit(x, y, 15, DistanceKind::jaccard, 8);
  const Vector rs = model_predict(r, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::vector<std::size_t> one{i};
    EXPECT_NEAR(model_predict(r, x.select_rows(one))(0), rs(static_cast<Eigen::Index>(i)), 1e-10);
  }
  EXPECT_THROW(model_predict(m, SparseBinaryMatrix(49, {{0}})), ContractViolation);
}

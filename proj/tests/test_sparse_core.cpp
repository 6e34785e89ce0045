#include <gtest/gtest.h>

#include <random>

#include "srpelm/sparse_matrix.hpp"
#include "test_util.hpp"

using namespace srpelm;
using testutil::random_sparse;

TEST(SparseMatrix, RejectsBadRows) {
  EXPECT_THROW(SparseBinaryMatrix(3, {{0, 3}}), ContractViolation);
  EXPECT_THROW(SparseBinaryMatrix(5, {{2, 2}}), ContractViolation);
  EXPECT_THROW(SparseBinaryMatrix(5, {{3, 1}}), ContractViolation);
}

TEST(SparseMatrix, NnzIsSumOfRowLengths) {
  SparseBinaryMatrix m(6, {{0, 5}, {}, {1, 2, 3}});
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.nnz(), 5u);
  EXPECT_EQ(m.row_nnz(2), 3u);
}

TEST(SparseGram, SelfIntersectionIsSetSize) {
  SparseBinaryMatrix a(4, {{1, 2, 3}});
  const DenseMatrix g = sparse_gram(a, a);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_EQ(g(0, 0), 3.0);
}

TEST(SparseGram, DisjointVersusSharedSingleton) {
  SparseBinaryMatrix a(3, {{0}, {1}});
  SparseBinaryMatrix b(3, {{1}, {2}});
  const DenseMatrix g = sparse_gram(a, b);
  DenseMatrix expect(2, 2);
  expect << 0, 0, 1, 0;
  EXPECT_EQ(g, expect);
}

TEST(SparseGram, MatchesSetIntersectionOracle) {
  std::mt19937_64 rng(11);
  const auto a = random_sparse(50, 30, 0.1, rng);
  const auto b = random_sparse(50, 30, 0.1, rng);
  const DenseMatrix g = sparse_gram(a, b);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      EXPECT_EQ(g(i, j), static_cast<double>(testutil::intersection_size(testutil::as_set(a, i), testutil::as_set(b, j))));
}

TEST(SparseGram, TransposeSymmetryDiagonalAndRange) {
  std::mt19937_64 rng(12);
  const auto a = random_sparse(40, 60, 0.2, rng);
  const auto b = random_sparse(35, 60, 0.2, rng);
  const DenseMatrix ab = sparse_gram(a, b);
  const DenseMatrix ba = sparse_gram(b, a);
  EXPECT_EQ(ab, DenseMatrix(ba.transpose()));
  const DenseMatrix aa = sparse_gram(a, a);
  const auto counts = row_counts(a);
  for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_EQ(aa(i, i), static_cast<double>(counts[i]));
  for (Eigen::Index i = 0; i < ab.rows(); ++i)
    for (Eigen::Index j = 0; j < ab.cols(); ++j) {
      EXPECT_EQ(ab(i, j), std::floor(ab(i, j)));
      EXPECT_GE(ab(i, j), 0.0);
      EXPECT_LE(ab(i, j), static_cast<double>(std::min(a.row_nnz(i), b.row_nnz(j))));
    }
}

TEST(SparseGram, DimensionMismatch) {
  SparseBinaryMatrix a(3, {{0}});
  SparseBinaryMatrix b(4, {{0}});
  EXPECT_THROW(sparse_gram(a, b), ContractViolation);
}

TEST(RowCounts, Cases) {
  EXPECT_TRUE(row_counts(SparseBinaryMatrix(5, std::vector<std::vector<std::uint32_t>>{})).empty());
  EXPECT_EQ(row_counts(SparseBinaryMatrix(6, {{0, 5}, {}})), (std::vector<std::size_t>{2, 0}));
  std::mt19937_64 rng(13);
  const auto rows = testutil::random_rows(30, 20, 0.3, rng);
  const auto counts = row_counts(SparseBinaryMatrix(20, rows));
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(counts[i], rows[i].size());
}

TEST(SparseDenseProduct, SelectiveSum) {
  SparseBinaryMatrix a(3, {{0, 2}});
  DenseMatrix v(3, 1);
  v << 1, 10, 100;
  EXPECT_EQ(sparse_dense_product(a, v)(0, 0), 101.0);
}

TEST(SparseDenseProduct, IdentityGivesDenseCopy) {
  std::mt19937_64 rng(14);
  const auto a = random_sparse(7, 9, 0.4, rng);
  EXPECT_EQ(sparse_dense_product(a, DenseMatrix::Identity(9, 9)), a.to_dense());
}

TEST(SparseDenseProduct, MatchesNaiveOracle) {
  std::mt19937_64 rng(15);
  const auto a = random_sparse(45, 33, 0.2, rng);
  const DenseMatrix v = testutil::random_dense(33, 7, rng);
  const DenseMatrix got = sparse_dense_product(a, v);
  const DenseMatrix want = testutil::naive_product(a.to_dense(), v);
  EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SparseDenseProduct, DimensionMismatch) {
  SparseBinaryMatrix a(3, {{0}});
  EXPECT_THROW(sparse_dense_product(a, DenseMatrix::Zero(4, 1)), ContractViolation);
}

TEST(SparseCore, BitExactAcrossThreadCounts) {
  std::mt19937_64 rng(16);
  const auto a = random_sparse(300, 200, 0.05, rng);
  const auto b = random_sparse(250, 200, 0.05, rng);
  const DenseMatrix v = testutil::random_dense(200, 13, rng);
  auto run = [&] { return std::make_pair(sparse_gram(a, b), sparse_dense_product(a, v)); };
  const auto one = testutil::with_threads("1", run);
  const auto four = testutil::with_threads("4", run);
  EXPECT_EQ(one.first, four.first);
  EXPECT_EQ(one.second, four.second);
}

TEST(SparseMatrix, SelectRowsAndVstack) {
  SparseBinaryMatrix a(5, {{0}, {1, 2}, {4}});
  const std::vector<std::size_t> pick{2, 0};
  const auto s = a.select_rows(pick);
  EXPECT_EQ(s, SparseBinaryMatrix(5, {{4}, {0}}));
  EXPECT_EQ(vstack(s, a).rows(), 5u);
  EXPECT_EQ(a.with_cols(9).cols(), 9u);
}

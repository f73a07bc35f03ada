#include "test_support.hpp"

using namespace lingae;
using namespace lingae::testing;

TEST(DenseMatrix, RaggedInitializerRejected) {
  EXPECT_THROW((DenseMatrix{{1, 2}, {3}}), ContractViolation);
  EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1, 2, 3}), ContractViolation);
}

TEST(Matmul, MatchesTripleLoop) {
  const auto a = random_matrix(7, 5, 1), b = random_matrix(5, 4, 2);
  expect_near(matmul(a, b), naive_matmul(a, b), 1e-12);
  expect_near(matmul_tn(a, random_matrix(7, 3, 3)), naive_matmul(transpose(a), random_matrix(7, 3, 3)), 1e-12);
  expect_near(matmul_nt(a, random_matrix(6, 5, 4)), naive_matmul(a, transpose(random_matrix(6, 5, 4))), 1e-12);
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), ContractViolation);
}

TEST(Sparse, TripletsSumDuplicatesAndSort) {
  auto s = SparseMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}});
  EXPECT_EQ(s.nnz(), 2u);
  EXPECT_DOUBLE_EQ(s.at(1, 2), 1.5);
  EXPECT_DOUBLE_EQ(s.at(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(s.at(0, 0), 0.0);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), ContractViolation);
}

TEST(Sparse, SpmmMatchesDensifiedProduct) {
  const auto d = random_matrix(9, 9, 5);
  DenseMatrix masked = d;
  for (std::size_t k = 0; k < masked.size(); ++k)
    if (k % 3) masked.data()[k] = 0.0;
  const auto s = SparseMatrix::from_dense(masked);
  const auto x = random_matrix(9, 4, 6);
  expect_near(spmm(s, x), naive_matmul(masked, x), 1e-12);
  expect_near(spmm_tn(s, x), naive_matmul(transpose(masked), x), 1e-12);
  EXPECT_EQ(s.transpose().to_dense(), transpose(masked));
}

TEST(QR, ReconstructsAndIsOrthogonal) {
  const auto a = random_matrix(12, 5, 7);
  HouseholderQR qr(a);
  expect_near(qr.apply_q(qr.r()), a, 1e-12);
  EXPECT_LT(orthonormality_error(qr.q_columns(0, 12)), 1e-12);
  const auto r = qr.r();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(r(i, j), 0.0);
}

TEST(SVD, ReconstructsTallWideAndSquare) {
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{30, 4}, {6, 6}, {4, 9}, {7, 5}}) {
    const auto a = random_matrix(m, n, m * 31 + n);
    const auto svd = thin_svd(a);
    DenseMatrix us = svd.u;
    for (std::size_t i = 0; i < us.rows(); ++i)
      for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= svd.singular[k];
    expect_near(matmul_nt(us, svd.v), a, 1e-11);
    EXPECT_LT(orthonormality_error(svd.u), 1e-11);
    EXPECT_LT(orthonormality_error(svd.v), 1e-11);
    EXPECT_TRUE(std::is_sorted(svd.singular.rbegin(), svd.singular.rend()));
  }
}

TEST(SVD, SingularValuesMatchEigenvaluesOfGram) {
  const auto a = random_matrix(10, 4, 8);
  const auto s = singular_values(a);
  const auto eig = symmetric_eigen(matmul_tn(a, a));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(s[k] * s[k], eig.values[k], 1e-10 * eig.values[0]);
}

TEST(SVD, RankDeficientStillOrthonormal) {
  const auto b = random_matrix(8, 2, 9);
  const auto a = matmul(b, random_matrix(2, 6, 10));  // rank 2
  const auto svd = thin_svd(a);
  EXPECT_LT(orthonormality_error(svd.u), 1e-10);
  EXPECT_EQ(numeric_rank(a), 2u);
  EXPECT_EQ(numeric_rank(DenseMatrix(3, 3)), 0u);
}

TEST(NumericRank, ToleranceMustBeInUnitInterval) {
  EXPECT_THROW(numeric_rank(DenseMatrix::identity(2), 0.0), ContractViolation);
  EXPECT_THROW(numeric_rank(DenseMatrix::identity(2), 1.0), ContractViolation);
}

TEST(LeastSquares, MatchesNormalEquationsOnFullRank) {
  const auto a = random_matrix(15, 4, 11), b = random_matrix(15, 2, 12);
  const auto fit = least_squares(a, b);
  // AᵀA W = Aᵀb
  expect_near(matmul(matmul_tn(a, a), fit.solution), matmul_tn(a, b), 1e-10);
  EXPECT_NEAR(fit.residual_norm, frobenius_norm(matmul(a, fit.solution) - b), 1e-12);
}

TEST(LeastSquares, MinimumNormOnRankDeficient) {
  DenseMatrix a{{1, 1}, {1, 1}};
  DenseMatrix b{{2}, {2}};
  const auto fit = least_squares(a, b);
  EXPECT_NEAR(fit.solution(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(fit.solution(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(fit.residual_norm, 0.0, 1e-12);
}

TEST(Eigen, DecomposesSymmetricMatrix) {
  const auto b = random_matrix(7, 7, 13);
  const auto s = b + transpose(b);
  const auto eig = symmetric_eigen(s);
  EXPECT_LT(orthonormality_error(eig.vectors), 1e-10);
  for (std::size_t k = 0; k < 7; ++k) {
    auto v = eig.vectors.column(k);
    DenseMatrix col(7, 1, v);
    expect_near(matmul(s, col), eig.values[k] * col, 1e-9);
  }
  EXPECT_TRUE(std::is_sorted(eig.values.rbegin(), eig.values.rend()));
}

TEST(Complement, OrthogonalToInputAndOrthonormal) {
  const auto a = random_matrix(20, 5, 14);
  const auto c = orthogonal_complement(a, 6);
  EXPECT_LT(orthonormality_error(c), 1e-12);
  EXPECT_LT(max_abs(matmul_tn(a, c)), 1e-12);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "liestyle/errors.hpp"
#include "liestyle/numerics.hpp"
#include "test_util.hpp"

using namespace liestyle;
using liestyle::testing::max_abs_diff;
using liestyle::testing::projector;
using liestyle::testing::random_matrix;

namespace {

Matrix reconstruct(const SvdResult& r) {
  Matrix s(r.u.cols(), r.vt.rows());
  for (std::size_t i = 0; i < r.singular_values.size(); ++i) s(i, i) = r.singular_values[i];
  return r.u * s * r.vt;
}

double orthonormality_error(const Matrix& q) {
  return max_abs_diff(q.transposed() * q, Matrix::identity(q.cols()));
}

}  // namespace

TEST(Svd, IdentityHasUnitSingularValues) {
  const auto r = svd(Matrix::identity(3));
  for (double s : r.singular_values) EXPECT_DOUBLE_EQ(s, 1.0);
}

TEST(Svd, DiagonalKeepsOrder) {
  const double d[] = {3, 2, 1};
  const auto r = svd(Matrix::diagonal(d));
  EXPECT_NEAR(r.singular_values[0], 3, 1e-14);
  EXPECT_NEAR(r.singular_values[1], 2, 1e-14);
  EXPECT_NEAR(r.singular_values[2], 1, 1e-14);
  EXPECT_LT(max_abs_diff(projector(r.u), Matrix::identity(3)), 1e-14);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(r.u(i, i)), 1.0, 1e-14);
}

TEST(Svd, RandomReconstruction) {
  const Matrix m = random_matrix(5, 3, 7);
  const auto r = svd(m);
  EXPECT_LT((m - reconstruct(r)).frobenius_norm() / m.frobenius_norm(), 1e-10);
}

TEST(Svd, PropertyReconstructionAndOrthonormality) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {7, 3}, {3, 7}, {40, 40}, {128, 64}, {512, 512}};
  std::uint64_t seed = 100;
  for (auto [r, c] : shapes) {
    const Matrix m = random_matrix(r, c, seed++);
    for (auto mode : {SvdMode::Thin, SvdMode::Full}) {
      const auto dec = svd(m, mode);
      EXPECT_LT((m - reconstruct(dec)).frobenius_norm() / m.frobenius_norm(), 1e-8) << r << "x" << c;
      EXPECT_LT(orthonormality_error(dec.u), 1e-8);
      EXPECT_LT(orthonormality_error(dec.vt.transposed()), 1e-8);
      EXPECT_TRUE(std::is_sorted(dec.singular_values.rbegin(), dec.singular_values.rend()));
      for (double s : dec.singular_values) EXPECT_GE(s, 0.0);
    }
  }
}

TEST(Svd, FullModeShapes) {
  const auto r = svd(random_matrix(2, 5, 3), SvdMode::Full);
  EXPECT_EQ(r.u.rows(), 2u);
  EXPECT_EQ(r.vt.rows(), 5u);
  EXPECT_EQ(r.vt.cols(), 5u);
  EXPECT_EQ(r.singular_values.size(), 2u);
}

TEST(Svd, RejectsNonFinite) {
  Matrix m = Matrix::identity(2);
  m(0, 1) = NAN;
  EXPECT_THROW(svd(m), NumericError);
  m(0, 1) = INFINITY;
  EXPECT_THROW(svd(m), NumericError);
  EXPECT_THROW(svd(Matrix()), NumericError);
}

TEST(OrthonormalBasis, OrthonormalInputUnchangedUpToSign) {
  const Matrix q = orthonormal_basis(random_matrix(6, 3, 11));
  const Matrix again = orthonormal_basis(q);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t r = 0; r < 6; ++r) EXPECT_NEAR(std::abs(again(r, c)), std::abs(q(r, c)), 1e-12);
}

TEST(OrthonormalBasis, SpanMatchesProjectorOracle) {
  const Matrix m{{1, 1}, {0, 1}, {0, 0}};  // columns e1, e1 + e2
  const Matrix q = orthonormal_basis(m);
  EXPECT_LT(orthonormality_error(q), 1e-10);
  const Matrix oracle{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
  EXPECT_LT(max_abs_diff(projector(q), oracle), 1e-10);
}

TEST(OrthonormalBasis, RandomSpanPreserved) {
  const Matrix m = random_matrix(9, 4, 5);
  const Matrix q = orthonormal_basis(m);
  EXPECT_LT(orthonormality_error(q), 1e-10);
  // Every input column lies in span(q).
  const Matrix residual = m - projector(q) * m;
  EXPECT_LT(residual.frobenius_norm(), 1e-10 * m.frobenius_norm());
}

TEST(OrthonormalBasis, RankDeficientNamesColumnCount) {
  const Matrix m{{1, 1}, {2, 2}, {3, 3}};
  try {
    orthonormal_basis(m);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos) << e.what();
  }
}

TEST(PrincipalAngles, SameSubspaceIsZero) {
  const Matrix a = random_matrix(5, 2, 1);
  for (double t : principal_angles(a, a)) EXPECT_NEAR(t, 0.0, 1e-7);
}

TEST(PrincipalAngles, OrthogonalLines) {
  const auto t = principal_angles(Matrix{{1}, {0}}, Matrix{{0}, {1}});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0], std::numbers::pi / 2, 1e-12);
}

TEST(PrincipalAngles, HandComputedPair) {
  const double h = 1 / std::sqrt(2.0);
  const Matrix a{{1, 0}, {0, 1}, {0, 0}};
  const Matrix b{{1, 0}, {0, h}, {0, h}};
  const auto t = principal_angles(a, b);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_NEAR(t[0], 0.0, 1e-7);
  EXPECT_NEAR(t[1], std::numbers::pi / 4, 1e-12);
}

TEST(PrincipalAngles, SymmetricAndBasisInvariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = random_matrix(8, 3, seed);
    const Matrix b = random_matrix(8, 3, seed + 1000);
    const auto ab = principal_angles(a, b);
    const auto ba = principal_angles(b, a);
    const auto mixed = principal_angles(a * random_matrix(3, 3, seed + 2000), b * random_matrix(3, 3, seed + 3000));
    ASSERT_EQ(ab.size(), 3u);
    EXPECT_TRUE(std::is_sorted(ab.begin(), ab.end()));
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(ab[i], ba[i], 1e-10);
      EXPECT_NEAR(ab[i], mixed[i], 1e-8);
      EXPECT_GE(ab[i], 0.0);
      EXPECT_LE(ab[i], std::numbers::pi / 2);
    }
  }
}

TEST(PrincipalAngles, AmbientMismatchThrows) {
  EXPECT_THROW(principal_angles(random_matrix(3, 1, 0), random_matrix(4, 1, 1)), NumericError);
}

TEST(MatrixExp, ZeroTimeIsExactIdentity) {
  EXPECT_EQ(matrix_exp(random_matrix(4, 4, 3), 0.0), Matrix::identity(4));
}

TEST(MatrixExp, QuarterTurn) {
  const Matrix a{{0, -1}, {1, 0}};
  const Matrix r = matrix_exp(a, std::numbers::pi / 2);
  const Matrix expect{{0, -1}, {1, 0}};
  EXPECT_LT(max_abs_diff(r, expect), 1e-9);
}

TEST(MatrixExp, DiagonalClosedForm) {
  const Matrix r = matrix_exp(Matrix{{1, 0}, {0, 2}}, 1.0);
  EXPECT_NEAR(r(0, 0) / std::exp(1.0), 1.0, 1e-9);
  EXPECT_NEAR(r(1, 1) / std::exp(2.0), 1.0, 1e-9);
  EXPECT_EQ(r(0, 1), 0.0);
}

TEST(MatrixExp, RotationOracleAtManyAngles) {
  const Matrix a{{0, -1}, {1, 0}};
  for (double t = -7.0; t <= 7.0; t += 0.37) {
    const Matrix r = matrix_exp(a, t);
    const Matrix expect{{std::cos(t), -std::sin(t)}, {std::sin(t), std::cos(t)}};
    EXPECT_LT(max_abs_diff(r, expect), 1e-9) << t;
  }
}

TEST(MatrixExp, OneParameterGroupProperty) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = random_matrix(3, 3, seed);
    const double s = 0.3 + 0.1 * seed, t = -0.7 + 0.05 * seed;
    const Matrix lhs = matrix_exp(a, s + t);
    const Matrix rhs = matrix_exp(a, s) * matrix_exp(a, t);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-8 * std::max(1.0, lhs.frobenius_norm()));
  }
}

TEST(MatrixExp, NonSquareThrows) { EXPECT_THROW(matrix_exp(Matrix(2, 3), 1.0), NumericError); }

#include <gtest/gtest.h>

#include <cmath>

#include "lessketch/diagnostics.hpp"
#include "lessketch/generators.hpp"
#include "lessketch/leverage.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"

using namespace lessketch;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  return gaussian_matrix(n, d, seed).matrix();
}

// Oracle for small inverses: Gauss-Jordan with partial pivoting, independent
// of the Cholesky path under test.
Matrix gauss_jordan_inverse(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double p = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= p;
      inv(c, k) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

}  // namespace

TEST(Gram, SmallExample) {
  const Matrix g = gram(Matrix{{1, 2}, {3, 4}});
  EXPECT_EQ(g, (Matrix{{10, 14}, {14, 20}}));
}

TEST(Gram, PaddedIdentity) {
  Matrix a(7, 3);
  for (std::size_t i = 0; i < 3; ++i) a(i, i) = 1.0;
  EXPECT_EQ(gram(a), Matrix::identity(3));
}

TEST(Gram, LowerBoundMatrixIsIdentity) {
  for (std::size_t d : {2u, 3u, 10u, 32u}) {
    const Matrix g = gram(lower_bound_matrix(d).matrix());
    EXPECT_LE(max_abs_diff(g, Matrix::identity(d)), 1e-15) << "d=" << d;
  }
}

TEST(Gram, ExactlySymmetric) {
  const Matrix g = gram(random_matrix(50, 6, 3));
  EXPECT_EQ(g, g.transpose());
}

TEST(TallMatrix, RejectsWideInput) {
  EXPECT_THROW(TallMatrix(Matrix(2, 3)), Error);
}

TEST(SpdInverse, Examples) {
  EXPECT_EQ(spd_inverse(SpdMatrix(Matrix::identity(4))).matrix(), Matrix::identity(4));
  const auto d = spd_inverse(SpdMatrix(Matrix{{2, 0}, {0, 4}}));
  EXPECT_DOUBLE_EQ(d(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(d(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
  const auto m = spd_inverse(SpdMatrix(Matrix{{2, 1}, {1, 2}}));
  const Matrix expected = Matrix{{2, -1}, {-1, 2}} * (1.0 / 3.0);
  EXPECT_LE(max_abs_diff(m.matrix(), expected), 1e-15);
}

TEST(SpdInverse, MatchesGaussJordanOracle) {
  const Matrix h = gram(random_matrix(40, 7, 11));
  const Matrix inv = spd_inverse(SpdMatrix(h)).matrix();
  EXPECT_LE(max_abs_diff(inv, gauss_jordan_inverse(h)), 1e-10);
  EXPECT_LE(max_abs_diff(h * inv, Matrix::identity(7)), 1e-8);
}

TEST(SpdInverse, InvolutionOnIllConditioned) {
  // Condition number 1e6 via a diagonal scaling of a random SPD matrix.
  Matrix h = gram(random_matrix(30, 5, 4));
  const double scales[] = {1.0, 10.0, 100.0, 1000.0, 1.0};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) h(i, j) *= scales[i] * scales[j];
  const Matrix back = spd_inverse(spd_inverse(SpdMatrix(h))).matrix();
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      worst = std::max(worst, std::abs(back(i, j) - h(i, j)) / std::sqrt(h(i, i) * h(j, j)));
  EXPECT_LE(worst, 1e-6);
}

TEST(SpdInverse, SingularRaisesNotPositiveDefinite) {
  try {
    spd_inverse(SpdMatrix(Matrix{{1, 1}, {1, 1}}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotPositiveDefinite);
  }
  EXPECT_FALSE(try_spd_inverse(Matrix{{1, 0}, {0, 0}}).has_value());
}

TEST(OrthonormalBasis, OrthonormalInputIsReproducedUpToSigns) {
  const Matrix a{{1, 0}, {0, -1}, {0, 0}};
  const Matrix u = orthonormal_basis(TallMatrix(a)).matrix();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(std::abs(u(i, j)), std::abs(a(i, j)));
}

TEST(OrthonormalBasis, ScaledAxes) {
  const Matrix u = orthonormal_basis(TallMatrix(Matrix{{2, 0}, {0, 3}, {0, 0}})).matrix();
  const Matrix expected{{1, 0}, {0, 1}, {0, 0}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(u(i, j)), expected(i, j), 1e-15);
}

TEST(OrthonormalBasis, ProjectionReproducesRows) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TallMatrix a(random_matrix(60, 8, seed));
    const Matrix u = orthonormal_basis(a).matrix();
    EXPECT_LE(max_abs_diff(u.transpose() * u, Matrix::identity(8)), 1e-10);
    const Matrix proj = u * (u.transpose() * a.matrix());
    for (std::size_t i = 0; i < a.n(); ++i) {
      double err = 0.0;
      for (std::size_t j = 0; j < 8; ++j) err = std::max(err, std::abs(proj(i, j) - a.row(i)[j]));
      EXPECT_LE(err, 1e-8 * std::max(1.0, norm2(a.row(i))));
    }
  }
}

TEST(OrthonormalBasis, RankDeficientRaises) {
  try {
    orthonormal_basis(TallMatrix(Matrix{{1, 2}, {2, 4}, {3, 6}}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankDeficient);
  }
}

TEST(ExactLeverage, Examples) {
  const auto a = exact_leverage_scores(TallMatrix(Matrix{{1, 0}, {0, 1}, {0, 0}}));
  EXPECT_NEAR(a.scores[0], 1.0, 1e-15);
  EXPECT_NEAR(a.scores[1], 1.0, 1e-15);
  EXPECT_NEAR(a.scores[2], 0.0, 1e-15);
  const auto b = exact_leverage_scores(TallMatrix(Matrix{{1}, {1}}));
  EXPECT_NEAR(b.scores[0], 0.5, 1e-15);
  EXPECT_NEAR(b.scores[1], 0.5, 1e-15);
  const auto c = exact_leverage_scores(lower_bound_matrix(2));
  const double expected[] = {0.25, 0.75, 0.5, 0.5};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(c.scores[i], expected[i], 1e-15);
}

TEST(ExactLeverage, SumToDAndBounded) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto prof = exact_leverage_scores(heavy_tail_matrix(200, 9, seed));
    double total = 0.0;
    for (double l : prof.scores) {
      EXPECT_GE(l, 0.0);
      EXPECT_LE(l, 1.0 + 1e-12);
      total += l;
    }
    EXPECT_NEAR(total, 9.0, 1e-8);
    EXPECT_NO_THROW(prof.validate(true));
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(Matrix{{3, 0}, {0, -5}}), 5.0, 5e-6);
  EXPECT_EQ(spectral_norm(Matrix(3, 3)), 0.0);
  const double v[] = {2.0 / std::sqrt(3.0), 2.0 / std::sqrt(3.0), 2.0 / std::sqrt(3.0)};
  Matrix vv(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) vv(i, j) = v[i] * v[j];
  EXPECT_NEAR(spectral_norm(vv), 4.0, 4e-6);
}

TEST(SpectralNorm, AgreesWithEigenvaluesOnSymmetric) {
  const Matrix h = gram(random_matrix(20, 6, 8)) - Matrix::identity(6) * 20.0;
  EXPECT_NEAR(spectral_norm(h) / symmetric_operator_norm(h), 1.0, 1e-6);
}

TEST(SymmetricEigenvalues, KnownSpectrum) {
  const Vector eig = symmetric_eigenvalues(Matrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(eig[0], 1.0, 1e-14);
  EXPECT_NEAR(eig[1], 3.0, 1e-14);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lessketch/diagnostics.hpp"
#include "lessketch/generators.hpp"
#include "oracles.hpp"

using namespace lessketch;

namespace {

Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
  const Matrix g = gaussian_matrix(n, n, seed).matrix();
  return symmetrized(g);
}

// Var[x^T F x] by exhaustive enumeration over a finite coordinate law given
// as (value, probability) atoms, identical for every coordinate.
double enumerated_variance(const Matrix& f, const std::vector<std::pair<double, double>>& atoms) {
  const std::size_t n = f.rows();
  const std::size_t k = atoms.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  double m1 = 0.0, m2 = 0.0;
  std::vector<double> x(n);
  for (std::size_t code = 0; code < total; ++code) {
    double prob = 1.0;
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= k) {
      x[i] = atoms[c % k].first;
      prob *= atoms[c % k].second;
    }
    double form = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) form += x[i] * f(i, j) * x[j];
    m1 += prob * form;
    m2 += prob * form * form;
  }
  return m2 - m1 * m1;
}

}  // namespace

TEST(QuadraticFormVariance, ClosedFormExamples) {
  EXPECT_NEAR(quadratic_form_variance_exact(EntryLaw::gaussian(), Matrix::identity(3)), 6.0, 1e-15);
  EXPECT_NEAR(quadratic_form_variance_exact(EntryLaw::rademacher(), Matrix::identity(7)), 0.0, 1e-15);
  // I_k padded with zeros under keep probability s/m.
  const std::size_t k = 3;
  const double keep = 2.0 / 10.0;
  Matrix f(6, 6);
  for (std::size_t i = 0; i < k; ++i) f(i, i) = 1.0;
  EXPECT_NEAR(quadratic_form_variance_exact(EntryLaw::scaled_bernoulli_sign(keep), f),
              k * (1.0 / keep) * (1.0 - keep), 1e-12);
}

TEST(QuadraticFormVariance, ExactMatchesEnumeration) {
  const double keep = 0.3;
  const double v = 1.0 / std::sqrt(keep);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix f = random_symmetric(6, seed);
    EXPECT_NEAR(quadratic_form_variance_exact(EntryLaw::rademacher(), f),
                enumerated_variance(f, {{1.0, 0.5}, {-1.0, 0.5}}), 1e-10);
    EXPECT_NEAR(quadratic_form_variance_exact(EntryLaw::scaled_bernoulli_sign(keep), f),
                enumerated_variance(f, {{0.0, 1 - keep}, {v, keep / 2}, {-v, keep / 2}}), 1e-9);
  }
}

TEST(QuadraticFormVariance, DependentLawHasNoClosedForm) {
  const auto law = EntryLaw::leverage_sparsified(uniform_profile(4, 2));
  try {
    quadratic_form_variance_exact(law, Matrix::identity(4));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LawNotIndependent);
  }
}

TEST(QuadraticFormVariance, MonteCarloAgreesWithExact) {
  for (const auto& law :
       {EntryLaw::gaussian(), EntryLaw::rademacher(), EntryLaw::scaled_bernoulli_sign(0.25)}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Matrix f = random_symmetric(8, 40 + seed);
      const auto mc = quadratic_form_variance_mc(law, f, 20000, seed);
      EXPECT_NEAR(mc.variance, quadratic_form_variance_exact(law, f), 4.0 * mc.stderr_);
    }
  }
  const auto zero = quadratic_form_variance_mc(EntryLaw::rademacher(), Matrix::identity(8), 1000, 1);
  EXPECT_EQ(zero.variance, 0.0);
}

TEST(QuadraticFormVariance, RejectsFewTrials) {
  EXPECT_THROW(quadratic_form_variance_mc(EntryLaw::gaussian(), Matrix::identity(2), 999, 1), Error);
}

TEST(QuadraticFormVariance, LeverageSparsifiedStaysBounded) {
  const std::size_t n = 256, d = 16;
  for (auto kind : {MatrixKind::Gaussian, MatrixKind::HeavyTail, MatrixKind::CoherentBlock}) {
    const TallMatrix a = generate_matrix(kind, n, d, 50, d);
    const auto u = orthonormal_basis(a);
    const Matrix b = projection(u);
    const auto law = EntryLaw::leverage_sparsified(exact_leverage_scores(a));
    const auto mc = quadratic_form_variance_mc(law, b, 10000, 51);
    EXPECT_LE(mc.variance / static_cast<double>(d), 30.0) << to_string(kind);
  }
  const TallMatrix t4 = lower_bound_matrix(d);
  const auto law = EntryLaw::leverage_sparsified(exact_leverage_scores(t4));
  const auto mc = quadratic_form_variance_mc(law, projection(orthonormal_basis(t4)), 10000, 52);
  EXPECT_LE(mc.variance / static_cast<double>(d), 30.0);
}

TEST(QuadraticFormVariance, ObliviousSparseOnCoherentRows) {
  const std::size_t n = 256, d = 16;
  const auto s = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(d))));
  const std::size_t m = d * s;
  const double keep = static_cast<double>(s) / static_cast<double>(m);
  const TallMatrix a = coherent_block_matrix(n, d, d, 53);
  const Matrix b = projection(orthonormal_basis(a));
  const auto mc = quadratic_form_variance_mc(EntryLaw::scaled_bernoulli_sign(keep), b, 10000, 54);
  EXPECT_GE(mc.variance, 0.5 * d * (1.0 / keep) * (1.0 - keep));
}

TEST(RestrictedAlpha, Examples) {
  const auto u = orthonormal_basis(gaussian_matrix(20, 4, 55));
  EXPECT_NEAR(restricted_bs_alpha(u, std::vector<double>(20, 3.0)), 2.0, 1e-12);

  Matrix padded(10, 4);
  for (std::size_t i = 0; i < 4; ++i) padded(i, i) = 1.0;
  const auto pu = orthonormal_basis(TallMatrix(padded));
  EXPECT_NEAR(restricted_bs_alpha(pu, std::vector<double>(10, 1.0)), 0.0, 1e-12);

  // E x_i^4 = C / l_i gives at most C + 2.
  const auto lev = exact_leverage_scores(heavy_tail_matrix(64, 5, 56));
  const auto hu = orthonormal_basis(heavy_tail_matrix(64, 5, 56));
  for (double c : {1.0, 4.0}) {
    std::vector<double> fourth(64);
    for (std::size_t i = 0; i < 64; ++i) fourth[i] = c / lev.scores[i];
    EXPECT_LE(restricted_bs_alpha(hu, fourth), c + 2.0 + 1e-9);
  }
}

TEST(RestrictedAlpha, FullIdentityReducesToMaxMoment) {
  const auto u = orthonormal_basis(TallMatrix(Matrix::identity(5)));
  const std::vector<double> fourth = {1.0, 3.0, 7.5, 2.0, 4.0};
  EXPECT_NEAR(restricted_bs_alpha(u, fourth), 7.5 - 3.0 + 2.0, 1e-12);
}

TEST(DoublyStochastic, RandomShapes) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{8, 2}, {32, 4}, {100, 10}, {256, 32}};
  std::uint64_t seed = 60;
  for (auto [n, d] : shapes)
    for (int k = 0; k < 3; ++k) {
      const auto u = orthonormal_basis(heavy_tail_matrix(n, d, seed++));
      const auto r = doubly_stochastic_check(u);
      EXPECT_LE(r.row_resid, 1e-10);
      EXPECT_LE(r.lam_max, 1.0 + 1e-10);
      EXPECT_GE(r.lam_max, 1.0 - 1e-10);
      EXPECT_LE(r.column_sum_resid, 1e-10);
    }
}

TEST(DoublyStochastic, IdentityBasis) {
  const auto r = doubly_stochastic_check(orthonormal_basis(TallMatrix(Matrix::identity(4))));
  EXPECT_EQ(r.row_resid, 0.0);
  EXPECT_NEAR(r.lam_max, 1.0, 1e-15);
}

TEST(DoublyStochastic, ZeroRowsAreDropped) {
  Matrix a(12, 3);
  const Matrix g = gaussian_matrix(6, 3, 70).matrix();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j) a(2 * i, j) = g(i, j);
  const auto r = doubly_stochastic_check(orthonormal_basis(TallMatrix(a)));
  EXPECT_LE(r.row_resid, 1e-10);
}

TEST(Binomial, InverseMomentValues) {
  EXPECT_NEAR(binomial_inverse_moment_exact(1), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(binomial_inverse_moment_exact(2), 7.0 / 12.0, 1e-15);
  EXPECT_THROW(binomial_inverse_moment_exact(0), Error);
  EXPECT_THROW(binomial_inverse_moment_exact(10001), Error);
}

TEST(Binomial, InverseMomentAgainstPascal) {
  for (std::size_t b = 1; b <= 300; ++b) {
    const auto pmf = oracle::half_pmf_pascal(b);
    double expected = 0.0;
    for (std::size_t i = 0; i <= b; ++i) expected += pmf[i] / (i + 0.5 * b);
    ASSERT_NEAR(binomial_inverse_moment_exact(b) / expected, 1.0, 1e-12) << "b=" << b;
  }
}

TEST(Binomial, ShiftedInverseBiasBound) {
  for (std::size_t b = 1; b <= 64; ++b) {
    const double gap = b * binomial_inverse_moment_exact(b) - 1.0;
    EXPECT_GT(gap, 0.0);
    EXPECT_GE(gap, 3.0 / (256.0 * b)) << "b=" << b;
  }
  // Large b stays finite and strictly above 1/b.
  EXPECT_GT(10000 * binomial_inverse_moment_exact(10000), 1.0);
}

TEST(Binomial, TailValues) {
  EXPECT_NEAR(binomial_anticoncentration_check(4), 5.0 / 16.0, 1e-15);
  EXPECT_NEAR(binomial_anticoncentration_check(1), 0.5, 1e-15);
  for (std::size_t b = 1; b <= 256; ++b) EXPECT_GE(binomial_anticoncentration_check(b), 3.0 / 32.0);
}

TEST(LowerBoundMatrix, Rows) {
  const Matrix a = lower_bound_matrix(2).matrix();
  const Matrix expected{{0.5, 0}, {std::sqrt(0.75), 0}, {0, std::sqrt(0.5)}, {0, std::sqrt(0.5)}};
  EXPECT_EQ(a, expected);
  EXPECT_THROW(lower_bound_matrix(1), Error);
}

TEST(LowerBoundMatrix, UniformIsHalfApproximation) {
  for (std::size_t d : {2u, 5u, 32u}) {
    const auto lev = exact_leverage_scores(lower_bound_matrix(d));
    for (double l : lev.scores) {
      const double scaled = 2.0 * d * l / d;
      EXPECT_GE(scaled, 0.5 - 1e-12);
      EXPECT_LE(scaled, 1.5 + 1e-12);
    }
  }
}

TEST(LowerBoundRatio, ExactOracleAgreesWithEnumeration) {
  EXPECT_NEAR(oracle::lower_bound_ratio_exact(2, 8), oracle::lower_bound_ratio_bruteforce_d2(8),
              1e-12);
  EXPECT_NEAR(oracle::lower_bound_ratio_exact(2, 5), oracle::lower_bound_ratio_bruteforce_d2(5),
              1e-12);
}

TEST(LowerBoundRatio, GammaCancels) {
  const std::vector<double> gammas = {1.0, 2.0};
  const auto r = lower_bound_bias_ratio(4, 24, gammas, 2000, 80);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0].ratio, r[1].ratio, 1e-12);
  EXPECT_EQ(r[0].accepted, r[1].accepted);
}

TEST(LowerBoundRatio, SmallCaseMatchesExactOracle) {
  const std::vector<double> gammas = {1.0};
  const auto r = lower_bound_bias_ratio(2, 8, gammas, 100000, 81);
  EXPECT_NEAR(r[0].ratio, oracle::lower_bound_ratio_exact(2, 8), 4.0 * r[0].stderr_);
  // Acceptance is the probability that both columns are hit.
  EXPECT_NEAR(r[0].acceptance, 1.0 - 2.0 * std::pow(0.5, 8), 0.01);
}

TEST(LowerBoundRatio, ModerateCaseExceedsFrozenConstant) {
  const double c = (oracle::lower_bound_ratio_exact(2, 8) - 1.0) * 8.0 / 2.0 / 4.0;
  const std::vector<double> gammas = {1.0};
  const auto r = lower_bound_bias_ratio(8, 64, gammas, 40000, 82);
  EXPECT_GE(r[0].ratio - 1.0 - 4.0 * r[0].stderr_, c * 8.0 / 64.0);
  EXPECT_NEAR(r[0].ratio, oracle::lower_bound_ratio_exact(8, 64), 4.0 * r[0].stderr_);
}

TEST(LowerBoundRatio, RareConditioning) {
  const std::vector<double> gammas = {1.0};
  try {
    lower_bound_bias_ratio(32, 32, gammas, 2000, 83);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConditioningTooRare);
  }
  EXPECT_THROW(lower_bound_bias_ratio(8, 7, gammas, 100, 1), Error);
}

TEST(Counterexample, DistortedRowSampling) {
  EXPECT_GE(counterexample_row_sampling_variance(3), 1.0);
  for (std::size_t d : {2u, 4u, 8u, 16u, 32u}) {
    const double v = counterexample_row_sampling_variance(d);
    EXPECT_GE(v / ((d / 3.0) * (d / 3.0)), 1.0);
    // Mass 1/4 sits at l/p = 2d and mass 3/4 at 2d/3: d^2/4 + (3/4)(d/3)^2.
    EXPECT_NEAR(v, d * d / 3.0, 1e-9 * d * d);
  }
  const auto exact = exact_leverage_scores(duplicated_identity_matrix(3));
  EXPECT_NEAR(row_sampling_projection_variance(exact, exact.distribution), 0.0, 1e-20);
}

TEST(SubspaceEmbedding, HaarFullSize) {
  const TallMatrix a = gaussian_matrix(40, 5, 90);
  SketchSpec spec;
  spec.kind = SketchKind::Haar;
  spec.m = 40;
  EXPECT_EQ(subspace_embedding_check(a, spec, 1e-9, 50, 91), 0.0);
}

TEST(SubspaceEmbedding, LessAtLogSketchSize) {
  const std::size_t d = 32;
  const TallMatrix a = gaussian_matrix(4096, d, 92);
  SketchSpec spec;
  spec.kind = SketchKind::Less;
  spec.m = 8 * d * 5;
  spec.profile = exact_leverage_scores(a);
  EXPECT_LE(subspace_embedding_check(a, spec, 0.5, 200, 93), 0.05);
}

TEST(SubspaceEmbedding, GaussianAtStatedSize) {
  const std::size_t d = 8;
  const double eta = 0.5;
  const auto m = static_cast<std::size_t>(std::ceil(16.0 * (d + std::log(20.0)) / (eta * eta)));
  const TallMatrix a = gaussian_matrix(1024, d, 94);
  SketchSpec spec;
  spec.kind = SketchKind::Gaussian;
  spec.m = m;
  EXPECT_LE(subspace_embedding_check(a, spec, eta, 100, 95), 0.05);
}

TEST(SubspaceEmbedding, RejectsFewTrials) {
  const TallMatrix a = gaussian_matrix(40, 5, 96);
  SketchSpec spec;
  spec.kind = SketchKind::Gaussian;
  spec.m = 20;
  EXPECT_THROW(subspace_embedding_check(a, spec, 0.5, 49, 1), Error);
}

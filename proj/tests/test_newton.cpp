#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lessketch/generators.hpp"
#include "lessketch/newton.hpp"

using namespace lessketch;

namespace {

Vector random_point(std::size_t d, std::uint64_t seed, double scale = 0.5) {
  RandomStream s(seed, 0);
  Vector x(d);
  for (auto& v : x) v = scale * s.normal();
  return x;
}

SketchSpec less_spec(std::size_t m) {
  SketchSpec spec;
  spec.kind = SketchKind::Less;
  spec.m = m;
  return spec;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

// Logistic labels from a sign rule on arbitrary features.
GlmProblem logistic_on(TallMatrix phi, double lambda, std::uint64_t seed) {
  RandomStream s(seed, 0);
  std::vector<double> y(phi.n());
  for (std::size_t i = 0; i < phi.n(); ++i) {
    double u = 0.0;
    for (double v : phi.row(i)) u += v;
    y[i] = s.uniform() < detail::sigmoid(u / std::sqrt(static_cast<double>(phi.d()))) ? 1.0 : -1.0;
  }
  return GlmProblem(std::move(phi), std::move(y), GlmLoss::Logistic, lambda);
}

}  // namespace

TEST(Gradient, SquaredLossVanishesAtNormalEquations) {
  const auto p = least_squares_instance(80, 5, 0.3, 1);
  // (Phi^T Phi / n + lambda I) x = Phi^T y / n.
  const Matrix phi = p.features.matrix();
  Matrix h = gram(phi) * (1.0 / 80.0);
  for (std::size_t i = 0; i < 5; ++i) h(i, i) += 0.3;
  Vector rhs(5, 0.0);
  for (std::size_t i = 0; i < 80; ++i)
    for (std::size_t j = 0; j < 5; ++j) rhs[j] += phi(i, j) * p.labels[i] / 80.0;
  const Vector x = spd_solve(h, rhs);
  for (double g : gradient(p, x)) EXPECT_NEAR(g, 0.0, 1e-10);
}

TEST(Gradient, LogisticAtZero) {
  const auto p = logistic_instance(50, 4, 0.1, 2);
  const Vector zero(4, 0.0);
  const Vector g = gradient(p, zero);
  for (std::size_t j = 0; j < 4; ++j) {
    double expected = 0.0;
    for (std::size_t i = 0; i < 50; ++i) expected += -p.labels[i] / 2.0 * p.features.row(i)[j];
    EXPECT_NEAR(g[j], expected / 50.0, 1e-14);
  }
}

TEST(Gradient, FiniteDifferences) {
  for (const auto& p : {logistic_instance(60, 5, 0.05, 3), least_squares_instance(60, 5, 0.05, 4)}) {
    const Vector x = random_point(5, 5);
    const Vector g = gradient(p, x);
    const double h = 1e-6;
    for (std::size_t j = 0; j < 5; ++j) {
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      EXPECT_NEAR(g[j], (objective(p, xp) - objective(p, xm)) / (2 * h), 1e-5);
    }
  }
}

TEST(HessianSqrt, SquaredLossIsScaledFeatures) {
  const auto p = least_squares_instance(30, 3, 1.0, 6);
  const Matrix m = hessian_sqrt(p, random_point(3, 7)).matrix();
  EXPECT_LE(max_abs_diff(m, p.features.matrix() * (1.0 / std::sqrt(30.0))), 1e-15);
}

TEST(HessianSqrt, GramIdentityAgainstAssembledHessian) {
  const auto p = logistic_instance(70, 6, 0.02, 8);
  const Vector x = random_point(6, 9);
  Matrix explicit_h = Matrix::identity(6) * 0.02;
  for (std::size_t i = 0; i < 70; ++i) {
    auto phi = p.features.row(i);
    const double s = detail::sigmoid(p.labels[i] * dot(phi, x));
    const double w = s * (1 - s) / 70.0;
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) explicit_h(a, b) += w * phi[a] * phi[b];
  }
  EXPECT_LE(max_abs_diff(hessian(p, x), explicit_h), 1e-10);
}

TEST(HessianSqrt, FiniteDifferenceHessian) {
  const auto p = logistic_instance(60, 4, 0.05, 10);
  const Vector x = random_point(4, 11);
  const Matrix h = hessian(p, x);
  const double step = 1e-5;
  for (std::size_t j = 0; j < 4; ++j) {
    Vector xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    const Vector gp = gradient(p, xp), gm = gradient(p, xm);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(h(i, j), (gp[i] - gm[i]) / (2 * step), 1e-4);
  }
}

TEST(GlmProblem, Validation) {
  const TallMatrix phi = gaussian_matrix(5, 2, 12);
  EXPECT_THROW(GlmProblem(phi, {1, -1, 1, 1, 1}, GlmLoss::Logistic, 0.0), Error);
  EXPECT_THROW(GlmProblem(phi, {1, -1, 1, 0.5, 1}, GlmLoss::Logistic, 1.0), Error);
  EXPECT_THROW(GlmProblem(phi, {1, -1}, GlmLoss::Squared, 1.0), Error);
}

TEST(NewtonStep, ExactBypassSolvesQuadraticInOneStep) {
  const auto p = least_squares_instance(100, 6, 0.1, 13);
  NewtonSketchOptions opt;
  opt.exact_sketch = true;
  const Vector x0(6, 0.0);
  const auto report = solve(p, less_spec(24), 1, x0, 5, 1e-10, 1, opt);
  EXPECT_EQ(report.iterations, 1u);
  EXPECT_TRUE(report.converged);
  const Vector x1 = distributed_newton_step(p, x0, less_spec(24), 1, 1, 0, opt);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(x1[j], report.x_star[j], 1e-10);
}

TEST(NewtonStep, ExactBypassIsQuadraticOnLogistic) {
  const auto p = logistic_instance(400, 8, 1e-3, 14);
  NewtonSketchOptions opt;
  opt.exact_sketch = true;
  const auto report = solve(p, less_spec(32), 1, Vector(8, 0.0), 20, 1e-12, 1, opt);
  ASSERT_TRUE(report.converged);
  ASSERT_GE(report.rho.size(), 3u);
  // Contraction factors shrink toward zero.
  EXPECT_LT(report.rho.back(), 1e-2);
  EXPECT_LT(report.rho.back(), report.rho.front());
}

TEST(NewtonStep, RequiresSketchLargerThanD) {
  const auto p = logistic_instance(100, 8, 0.01, 15);
  EXPECT_THROW(distributed_newton_step(p, Vector(8, 0.0), less_spec(8), 2, 1), Error);
}

TEST(NewtonStep, LargeQApproachesConditionedMeanStep) {
  // The spread of the step across master seeds shrinks as q grows.
  const auto p = logistic_instance(1024, 8, 1e-2, 16);
  const Vector x = random_point(8, 17, 0.3);
  auto spread = [&](std::size_t q) {
    std::vector<Vector> steps;
    for (std::uint64_t s = 0; s < 8; ++s)
      steps.push_back(distributed_newton_step(p, x, less_spec(32), q, 100 + s));
    Vector mean(8, 0.0);
    for (const auto& v : steps)
      for (std::size_t j = 0; j < 8; ++j) mean[j] += v[j] / steps.size();
    double acc = 0.0;
    for (const auto& v : steps)
      for (std::size_t j = 0; j < 8; ++j) acc += (v[j] - mean[j]) * (v[j] - mean[j]);
    return std::sqrt(acc / steps.size());
  };
  EXPECT_LT(spread(64), 0.5 * spread(4));
}

TEST(Solve, DebiasingLowersSteadyStateRate) {
  const std::size_t d = 16, m = 4 * d, q = 64;
  int wins = 0;
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const auto p = logistic_instance(2048, d, 1e-2, 200 + trial);
    const Vector x0(d, 0.0);
    const auto debiased = solve(p, less_spec(m), q, x0, 30, 1e-8, 300 + trial);
    NewtonSketchOptions plain;
    plain.gamma = 1.0;
    const auto biased = solve(p, less_spec(m), q, x0, 30, 1e-8, 300 + trial, plain);
    if (median(biased.rho) > median(debiased.rho)) ++wins;
  }
  EXPECT_GE(wins, 4);
}

TEST(Solve, ContractsOnZooInstances) {
  const std::size_t n = 1024, d = 16;
  std::uint64_t seed = 400;
  for (auto kind : {MatrixKind::Gaussian, MatrixKind::HeavyTail, MatrixKind::CoherentBlock}) {
    const auto p = logistic_on(generate_matrix(kind, n, d, seed, d), 1e-2, seed + 1);
    const auto report = solve(p, less_spec(4 * d), 16, Vector(d, 0.0), 40, 1e-8, seed + 2);
    EXPECT_TRUE(report.converged) << to_string(kind);
    for (double r : report.rho) EXPECT_LE(r, 1.0) << to_string(kind);
    seed += 10;
  }
}

TEST(Solve, LessNoSlowerThanLeverageSampling) {
  const std::size_t d = 16, m = 4 * d, q = 16;
  std::vector<double> less_iters, lev_iters;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto p = logistic_instance(1024, d, 1e-2, 500 + trial);
    const Vector x0(d, 0.0);
    less_iters.push_back(static_cast<double>(
        solve(p, less_spec(m), q, x0, 40, 1e-8, 600 + trial).iterations));
    SketchSpec lev;
    lev.kind = SketchKind::RowSampling;
    lev.m = m;
    lev.probabilities = exact_leverage_scores(hessian_sqrt(p, x0)).distribution;
    lev_iters.push_back(static_cast<double>(solve(p, lev, q, x0, 40, 1e-8, 600 + trial).iterations));
  }
  EXPECT_LE(median(less_iters), median(lev_iters));
}

TEST(Solve, DeterministicForNonGaussianKinds) {
  const auto p = logistic_instance(512, 8, 1e-2, 700);
  const Vector x0(8, 0.0);
  for (auto kind : {SketchKind::Less, SketchKind::Rademacher, SketchKind::Srht}) {
    SketchSpec spec;
    spec.kind = kind;
    spec.m = 32;
    const auto a = solve(p, spec, 8, x0, 20, 1e-8, 701);
    const auto b = solve(p, spec, 8, x0, 20, 1e-8, 701);
    EXPECT_EQ(a.distances, b.distances) << to_string(kind);
    EXPECT_EQ(a.rho, b.rho);
  }
}

TEST(Solve, ThreadCountDoesNotChangeIterates) {
  const auto p = logistic_instance(512, 8, 1e-2, 702);
  NewtonSketchOptions threaded;
  threaded.jobs = 3;
  const auto a = solve(p, less_spec(32), 8, Vector(8, 0.0), 20, 1e-8, 703);
  const auto b = solve(p, less_spec(32), 8, Vector(8, 0.0), 20, 1e-8, 703, threaded);
  EXPECT_EQ(a.distances, b.distances);
}

TEST(Solve, Preconditions) {
  const auto p = logistic_instance(100, 4, 1e-2, 704);
  EXPECT_THROW(solve(p, less_spec(16), 2, Vector(4, 0.0), 5, 1e-13, 1), Error);
  EXPECT_THROW(solve(p, less_spec(16), 2, Vector(3, 0.0), 5, 1e-8, 1), Error);
}

TEST(Solve, ReportsHessianDiagnostics) {
  const auto p = logistic_instance(400, 6, 0.05, 705);
  const auto report = solve(p, less_spec(24), 4, Vector(6, 0.0), 30, 1e-8, 706);
  EXPECT_GE(report.lambda_min, 0.05);
  EXPECT_GE(report.kappa, 1.0);
  for (double dist : report.distances) EXPECT_GE(dist, 0.0);
  for (double g : gradient(p, report.x_star)) EXPECT_NEAR(g, 0.0, 1e-10);
}

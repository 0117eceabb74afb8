#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/estimators.hpp"
#include "lessketch/leverage.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/parallel.hpp"
#include "lessketch/rng.hpp"
#include "lessketch/sketch.hpp"

namespace lessketch {

enum class GlmLoss { Squared, Logistic };

/// f(x) = (1/n) sum_i loss(x^T phi_i; y_i) + (lambda/2) ||x||^2.
struct GlmProblem {
  TallMatrix features;
  std::vector<double> labels;
  GlmLoss loss = GlmLoss::Squared;
  double lambda = 1.0;

  GlmProblem(TallMatrix phi, std::vector<double> y, GlmLoss l, double lam)
      : features(std::move(phi)), labels(std::move(y)), loss(l), lambda(lam) {
    require(labels.size() == features.n(), Errc::DimensionMismatch, "one label per row is required");
    require(lambda > 0.0, Errc::InvalidArgument, "lambda must be positive");
    if (loss == GlmLoss::Logistic)
      for (double v : labels)
        require(v == 1.0 || v == -1.0, Errc::InvalidArgument, "logistic labels must be +-1");
  }

  std::size_t n() const noexcept { return features.n(); }
  std::size_t d() const noexcept { return features.d(); }
};

namespace detail {

inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline double loss_value(GlmLoss loss, double u, double y) {
  if (loss == GlmLoss::Squared) return 0.5 * (u - y) * (u - y);
  const double z = -y * u;  // log(1 + e^z), computed stably
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double loss_slope(GlmLoss loss, double u, double y) {
  if (loss == GlmLoss::Squared) return u - y;
  return -y * sigmoid(-y * u);
}

inline double loss_curvature(GlmLoss loss, double u, double y) {
  if (loss == GlmLoss::Squared) return 1.0;
  const double s = sigmoid(y * u);
  return s * (1.0 - s);
}

}  // namespace detail

inline double objective(const GlmProblem& p, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i)
    acc += detail::loss_value(p.loss, dot(p.features.row(i), x), p.labels[i]);
  return acc / static_cast<double>(p.n()) + 0.5 * p.lambda * dot(x, x);
}

inline Vector gradient(const GlmProblem& p, std::span<const double> x) {
  Vector g(p.d(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    auto phi = p.features.row(i);
    const double slope = detail::loss_slope(p.loss, dot(phi, x), p.labels[i]) * inv_n;
    for (std::size_t j = 0; j < p.d(); ++j) g[j] += slope * phi[j];
  }
  for (std::size_t j = 0; j < p.d(); ++j) g[j] += p.lambda * x[j];
  return g;
}

/// Rows sqrt(loss''(x^T phi_i) / n) phi_i, so gram(.) + lambda I is the Hessian.
inline TallMatrix hessian_sqrt(const GlmProblem& p, std::span<const double> x) {
  Matrix out(p.n(), p.d());
  const double inv_n = 1.0 / static_cast<double>(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    auto phi = p.features.row(i);
    const double w = std::sqrt(detail::loss_curvature(p.loss, dot(phi, x), p.labels[i]) * inv_n);
    auto r = out.row(i);
    for (std::size_t j = 0; j < p.d(); ++j) r[j] = w * phi[j];
  }
  return TallMatrix(std::move(out));
}

inline Matrix with_ridge(Matrix m, double lambda) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += lambda;
  return m;
}

inline Matrix hessian(const GlmProblem& p, std::span<const double> x) {
  return with_ridge(gram(hessian_sqrt(p, x).matrix()), p.lambda);
}

struct NewtonSketchOptions {
  /// Replaces m / (m - d) when set; 1 disables debiasing.
  std::optional<double> gamma;
  /// Use the exact Hessian for every worker (no sketch).
  bool exact_sketch = false;
  /// Recompute the leverage profile (LESS) or leverage sampling distribution
  /// (row sampling) of the Hessian square root at every iterate.
  bool refresh_leverage = true;
  unsigned jobs = 1;
};

/// x - (1/q) sum_i H_i^{-1} grad f(x), with H_i = gamma gram(S_i M) + lambda I
/// for M = hessian_sqrt(p, x). Workers of iteration t use replicas t*q .. t*q+q-1.
inline Vector distributed_newton_step(const GlmProblem& p, std::span<const double> x,
                                      const SketchSpec& spec, std::size_t q,
                                      std::uint64_t master_seed, std::size_t iteration = 0,
                                      const NewtonSketchOptions& opt = {}) {
  require(q >= 1, Errc::InvalidArgument, "q must be positive");
  const std::size_t d = p.d();
  const Vector g = gradient(p, x);
  const TallMatrix m = hessian_sqrt(p, x);
  Vector step(d, 0.0);

  if (opt.exact_sketch) {
    step = spd_solve(with_ridge(gram(m.matrix()), p.lambda), g);
  } else {
    require(spec.m > d, Errc::SketchSmallerThanD, "Newton sketch needs m > d");
    SketchSpec local = spec;
    local.seed = master_seed;
    if (opt.refresh_leverage) {
      if (local.kind == SketchKind::Less && !local.hadamard_preprocess) {
        local.profile = exact_leverage_scores(m);
      } else if (local.kind == SketchKind::RowSampling && !detail::is_uniform(local.probabilities)) {
        local.probabilities = exact_leverage_scores(m).distribution;
      }
    }
    const double gamma = opt.gamma.value_or(debiasing_gamma(spec.m, d));
    const Sketcher sketcher(m, std::move(local));
    const std::uint64_t base = static_cast<std::uint64_t>(iteration) * q;
    for_each_replica(
        q, opt.jobs,
        [&](std::size_t i) {
          const Matrix h = with_ridge(gram(sketcher.apply(base + i)) * gamma, p.lambda);
          return spd_solve(h, g);
        },
        [&](std::size_t, Vector s) {
          for (std::size_t j = 0; j < d; ++j) step[j] += s[j];
        });
    for (double& v : step) v /= static_cast<double>(q);
  }

  Vector out(x.begin(), x.end());
  for (std::size_t j = 0; j < d; ++j) out[j] -= step[j];
  return out;
}

/// Minimizer by damped Newton with Armijo backtracking.
inline Vector exact_minimizer(const GlmProblem& p, std::span<const double> x0,
                              std::size_t max_iters = 200) {
  Vector x(x0.begin(), x0.end());
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vector g = gradient(p, x);
    const Vector step = spd_solve(hessian(p, x), g);
    const double decrement = dot(g, step);
    if (!std::isfinite(decrement)) break;
    if (norm2(step) <= 1e-14 * (1.0 + norm2(x))) return x;
    const double f0 = objective(p, x);
    double t = 1.0;
    Vector trial(x.size());
    // Once the decrement is below the resolution of f, Armijo can no longer
    // tell steps apart; take the full step.
    const bool resolvable = decrement > 1e-12 * (1.0 + std::abs(f0));
    for (int k = 0; k < (resolvable ? 60 : 1); ++k) {
      for (std::size_t j = 0; j < x.size(); ++j) trial[j] = x[j] - t * step[j];
      if (objective(p, trial) <= f0 - 1e-4 * t * decrement) break;
      t *= 0.5;
    }
    if (trial == x) return x;  // no representable progress left
    x = trial;
  }
  const Vector g = gradient(p, x);
  if (std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); }) &&
      norm2(g) <= 1e-10 * (1.0 + norm2(x)))
    return x;
  throw Error(Errc::BaselineDiverged, "exact Newton baseline did not converge");
}

struct ConvergenceReport {
  std::vector<double> distances;  // ||x_t - x*||, t = 0, 1, ...
  std::vector<double> rho;        // distances[t+1] / distances[t]
  std::size_t iterations = 0;
  bool converged = false;
  double kappa = 0.0;       // condition number of the Hessian at x*
  double lambda_min = 0.0;  // its smallest eigenvalue
  Vector x_star;
};

inline ConvergenceReport solve(const GlmProblem& p, const SketchSpec& spec, std::size_t q,
                               std::span<const double> x0, std::size_t max_iters, double tol,
                               std::uint64_t master_seed, const NewtonSketchOptions& opt = {}) {
  require(tol >= 1e-12, Errc::InvalidArgument, "tol must be at least 1e-12");
  require(x0.size() == p.d(), Errc::DimensionMismatch, "x0 must have d entries");
  ConvergenceReport report;
  report.x_star = exact_minimizer(p, x0);
  const Vector eig = symmetric_eigenvalues(hessian(p, report.x_star));
  report.lambda_min = eig.front();
  report.kappa = eig.back() / eig.front();

  auto distance = [&](std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += (x[j] - report.x_star[j]) * (x[j] - report.x_star[j]);
    return std::sqrt(acc);
  };
  Vector x(x0.begin(), x0.end());
  const double d0 = distance(x);
  report.distances.push_back(d0);
  if (d0 == 0.0) {
    report.converged = true;
    return report;
  }
  const double floor = 1e-14 * d0;
  for (std::size_t t = 0; t < max_iters; ++t) {
    x = distributed_newton_step(p, x, spec, q, master_seed, t, opt);
    const double dist = distance(x);
    report.rho.push_back(dist / report.distances.back());
    report.distances.push_back(dist);
    report.iterations = t + 1;
    if (dist <= tol * d0) {
      report.converged = true;
      break;
    }
    if (dist <= floor) break;
  }
  return report;
}

/// Standard Gaussian features and labels drawn from a logistic model whose
/// coefficients are Gaussian with variance 1/d, so x^T phi is O(1).
inline GlmProblem logistic_instance(std::size_t n, std::size_t d, double lambda, std::uint64_t seed) {
  require(n >= d && d >= 1, Errc::ShapeInvalid, "logistic instance needs n >= d >= 1");
  RandomStream coef_stream(seed, n);
  Vector beta(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& v : beta) v = scale * coef_stream.normal();
  Matrix phi(n, d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream stream(seed, i);
    auto r = phi.row(i);
    for (auto& v : r) v = stream.normal();
    y[i] = stream.uniform() < detail::sigmoid(dot(r, beta)) ? 1.0 : -1.0;
  }
  return GlmProblem(TallMatrix(std::move(phi)), std::move(y), GlmLoss::Logistic, lambda);
}

/// Gaussian features and labels phi^T beta + noise.
inline GlmProblem least_squares_instance(std::size_t n, std::size_t d, double lambda,
                                         std::uint64_t seed) {
  require(n >= d && d >= 1, Errc::ShapeInvalid, "least-squares instance needs n >= d >= 1");
  RandomStream coef_stream(seed, n);
  Vector beta(d);
  for (auto& v : beta) v = coef_stream.normal();
  Matrix phi(n, d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream stream(seed, i);
    auto r = phi.row(i);
    for (auto& v : r) v = stream.normal();
    y[i] = dot(r, beta) + 0.1 * stream.normal();
  }
  return GlmProblem(TallMatrix(std::move(phi)), std::move(y), GlmLoss::Squared, lambda);
}

}  // namespace lessketch

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
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

// ---------------------------------------------------------------------------
// Quadratic forms x^T F x for a single (scaled) row x of a sketch.

/// Law of the random vector x = sqrt(m) * (row of S). Every coordinate has
/// mean 0 and variance 1.
struct EntryLaw {
  enum class Kind { Gaussian, Rademacher, ScaledBernoulliSign, LeverageSparsified };

  Kind kind = Kind::Gaussian;
  /// ScaledBernoulliSign: s / m, the probability that a coordinate is kept.
  double keep_probability = 1.0;
  /// LeverageSparsified: the sparsifier profile and the law of x it masks.
  std::optional<LeverageProfile> profile;
  SubgaussianLaw base = SubgaussianLaw::Rademacher;

  static EntryLaw of(Kind k) {
    EntryLaw law;
    law.kind = k;
    return law;
  }
  static EntryLaw gaussian() { return of(Kind::Gaussian); }
  static EntryLaw rademacher() { return of(Kind::Rademacher); }
  static EntryLaw scaled_bernoulli_sign(double keep) {
    require(keep > 0.0 && keep <= 1.0, Errc::InvalidArgument, "keep probability must be in (0, 1]");
    EntryLaw law = of(Kind::ScaledBernoulliSign);
    law.keep_probability = keep;
    return law;
  }
  static EntryLaw leverage_sparsified(LeverageProfile profile,
                                      SubgaussianLaw base = SubgaussianLaw::Rademacher) {
    EntryLaw law = of(Kind::LeverageSparsified);
    law.profile = std::move(profile);
    law.base = base;
    return law;
  }

  bool independent_entries() const noexcept { return kind != Kind::LeverageSparsified; }

  /// E[x_i^4].
  double fourth_moment(std::size_t i) const {
    switch (kind) {
      case Kind::Gaussian: return 3.0;
      case Kind::Rademacher: return 1.0;
      case Kind::ScaledBernoulliSign: return 1.0 / keep_probability;
      case Kind::LeverageSparsified: {
        // E[xi^4] = E[b^2] / (d p)^2 with b ~ Binomial(d, p).
        const double p = profile->distribution.at(i);
        if (p <= 0.0) return 0.0;
        const double dp = static_cast<double>(profile->dim) * p;
        return base_fourth_moment() * ((1.0 - p) / dp + 1.0);
      }
    }
    return 0.0;
  }

  double base_fourth_moment() const noexcept {
    switch (base) {
      case SubgaussianLaw::Rademacher: return 1.0;
      case SubgaussianLaw::Gaussian: return 3.0;
      case SubgaussianLaw::Uniform: return 9.0 / 5.0;
    }
    return 0.0;
  }
};

/// Var[x^T F x] = sum_k (E x_k^4 - 3) F_kk^2 + 2 tr(F^2) for independent
/// coordinates.
inline double quadratic_form_variance_exact(const EntryLaw& law, const Matrix& f) {
  if (!law.independent_entries())
    throw Error(Errc::LawNotIndependent,
                "leverage-sparsified coordinates are dependent; use the Monte Carlo estimate");
  require(f.rows() == f.cols(), Errc::DimensionMismatch, "F must be square");
  double diag_term = 0.0;
  double trace_sq = 0.0;
  for (std::size_t k = 0; k < f.rows(); ++k) {
    diag_term += (law.fourth_moment(k) - 3.0) * f(k, k) * f(k, k);
    for (std::size_t j = 0; j < f.cols(); ++j) trace_sq += f(k, j) * f(j, k);
  }
  return diag_term + 2.0 * trace_sq;
}

struct VarianceEstimate {
  double variance = 0.0;
  double stderr_ = 0.0;
};

/// Sample variance of x^T B x over `trials` draws, with a 10-batch
/// batch-means standard error.
inline VarianceEstimate quadratic_form_variance_mc(const EntryLaw& law, const Matrix& b,
                                                   std::size_t trials, std::uint64_t seed) {
  require(trials >= 1000, Errc::InvalidArgument, "variance estimate needs at least 1000 trials");
  require(b.rows() == b.cols(), Errc::DimensionMismatch, "B must be square");
  const std::size_t n = b.rows();
  std::optional<AliasTable> table;
  if (law.kind == EntryLaw::Kind::LeverageSparsified) {
    require(law.profile && law.profile->size() == n, Errc::DimensionMismatch,
            "sparsifier profile length must match B");
    table.emplace(law.profile->distribution);
  }

  std::vector<double> values(trials);
  Vector x(n);
  std::vector<std::size_t> support;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream stream(seed, t);
    support.clear();
    switch (law.kind) {
      case EntryLaw::Kind::Gaussian:
        for (auto& v : x) v = stream.normal();
        break;
      case EntryLaw::Kind::Rademacher:
        for (auto& v : x) v = stream.sign();
        break;
      case EntryLaw::Kind::ScaledBernoulliSign: {
        const double scale = std::sqrt(1.0 / law.keep_probability);
        for (auto& v : x) v = stream.bernoulli(law.keep_probability) ? scale * stream.sign() : 0.0;
        break;
      }
      case EntryLaw::Kind::LeverageSparsified: {
        const auto draw = draw_sparsifier(*law.profile, *table, stream);
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t k = 0; k < draw.support.size(); ++k) {
          x[draw.support[k]] = draw.weights[k] * detail::draw_entry(law.base, stream);
          support.push_back(draw.support[k]);
        }
        break;
      }
    }
    double form = 0.0;
    if (law.kind == EntryLaw::Kind::LeverageSparsified) {
      for (std::size_t i : support)
        for (std::size_t j : support) form += x[i] * b(i, j) * x[j];
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] == 0.0) continue;
        form += x[i] * dot(b.row(i), x);
      }
    }
    values[t] = form;
  }

  auto sample_variance = [](std::span<const double> v) {
    double mean = 0.0;
    for (double z : v) mean += z;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double z : v) acc += (z - mean) * (z - mean);
    return acc / static_cast<double>(v.size() - 1);
  };
  VarianceEstimate out;
  out.variance = sample_variance(values);
  std::vector<double> batch_var;
  for (std::size_t k = 0; k < kBatchCount; ++k) {
    const std::size_t lo = k * trials / kBatchCount;
    const std::size_t hi = (k + 1) * trials / kBatchCount;
    batch_var.push_back(sample_variance(std::span<const double>(values).subspan(lo, hi - lo)));
  }
  out.stderr_ = batch_scalar_stderr(batch_var);
  return out;
}

/// Projection U U^T onto the column span.
inline Matrix projection(const OrthonormalBasis& u) {
  return u.matrix() * u.matrix().transpose();
}

/// lambda_max((U o U)^T D (U o U)) + 2 with D = diag(E x_k^4 - 3): the tight
/// Bai-Silverstein constant restricted to span(U) for independent coordinates.
inline double restricted_bs_alpha(const OrthonormalBasis& u, std::span<const double> fourth_moments) {
  require(fourth_moments.size() == u.n(), Errc::DimensionMismatch,
          "one fourth moment per row of U is required");
  const std::size_t d = u.d();
  Matrix m(d, d);
  for (std::size_t k = 0; k < u.n(); ++k) {
    require(std::isfinite(fourth_moments[k]), Errc::InvalidArgument, "fourth moments must be finite");
    const double dk = fourth_moments[k] - 3.0;
    if (dk == 0.0) continue;
    auto r = u.row(k);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) m(a, b) += dk * r[a] * r[a] * r[b] * r[b];
  }
  return symmetric_eigenvalues(m).back() + 2.0;
}

struct DoublyStochasticResult {
  double row_resid = 0.0;      // ||Q 1 - 1||_inf
  double lam_max = 0.0;        // lambda_max(Q)
  double column_sum_resid = 0.0;  // max_j |sum_i R_ij - 1|
};

/// Q = R^T diag(1 / l_i) R with R = U o U, over rows with l_i > 1e-12.
inline DoublyStochasticResult doubly_stochastic_check(const OrthonormalBasis& u) {
  const std::size_t d = u.d();
  Matrix q(d, d);
  Vector col_sum(d, 0.0);
  Vector r(d);
  for (std::size_t i = 0; i < u.n(); ++i) {
    auto ui = u.row(i);
    double lev = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      r[a] = ui[a] * ui[a];
      lev += r[a];
      col_sum[a] += r[a];
    }
    if (lev <= 1e-12) continue;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) q(a, b) += r[a] * r[b] / lev;
  }
  DoublyStochasticResult out;
  for (std::size_t a = 0; a < d; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < d; ++b) row += q(a, b);
    out.row_resid = std::max(out.row_resid, std::abs(row - 1.0));
    out.column_sum_resid = std::max(out.column_sum_resid, std::abs(col_sum[a] - 1.0));
  }
  out.lam_max = symmetric_eigenvalues(q).back();
  return out;
}

// ---------------------------------------------------------------------------
// Binomial(b, 1/2) oracles.

/// pmf of Binomial(b, 1/2), from log-space coefficients renormalized to sum 1.
inline std::vector<double> binomial_half_pmf(std::size_t b) {
  std::vector<double> logp(b + 1);
  const double lb = std::lgamma(static_cast<double>(b) + 1.0);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= b; ++i) {
    logp[i] = lb - std::lgamma(static_cast<double>(i) + 1.0) -
              std::lgamma(static_cast<double>(b - i) + 1.0);
    peak = std::max(peak, logp[i]);
  }
  std::vector<double> pmf(b + 1);
  double total = 0.0;
  for (std::size_t i = 0; i <= b; ++i) {
    pmf[i] = std::exp(logp[i] - peak);
    total += pmf[i];
  }
  for (double& p : pmf) p /= total;
  return pmf;
}

/// E[1 / (x + b/2)] for x ~ Binomial(b, 1/2).
inline double binomial_inverse_moment_exact(std::size_t b) {
  require(b >= 1 && b <= 10000, Errc::InvalidArgument, "b must be in [1, 10^4]");
  const auto pmf = binomial_half_pmf(b);
  const double half = 0.5 * static_cast<double>(b);
  double acc = 0.0;
  for (std::size_t i = 0; i <= b; ++i) acc += pmf[i] / (static_cast<double>(i) + half);
  return acc;
}

/// Pr(x <= b/2 - sqrt(b)/4) for x ~ Binomial(b, 1/2).
inline double binomial_anticoncentration_check(std::size_t b) {
  require(b >= 1, Errc::InvalidArgument, "b must be positive");
  const auto pmf = binomial_half_pmf(b);
  const double cut = 0.5 * static_cast<double>(b) - std::sqrt(static_cast<double>(b)) / 4.0;
  double acc = 0.0;
  for (std::size_t i = 0; i <= b && static_cast<double>(i) <= cut; ++i) acc += pmf[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Lower-bound constructions.

/// The 2d x d matrix whose first two rows are e_1/2 and sqrt(3/4) e_1 and
/// whose remaining rows come in equal pairs e_i / sqrt(2). A^T A = I and the
/// leverage scores are (1/4, 3/4, 1/2, ..., 1/2).
inline TallMatrix lower_bound_matrix(std::size_t d) {
  require(d >= 2, Errc::ShapeInvalid, "lower-bound matrix needs d >= 2");
  Matrix a(2 * d, d);
  a(0, 0) = 0.5;
  a(1, 0) = std::sqrt(0.75);
  for (std::size_t i = 1; i < d; ++i) {
    a(2 * i, i) = std::sqrt(0.5);
    a(2 * i + 1, i) = std::sqrt(0.5);
  }
  return TallMatrix(std::move(a));
}

struct LowerBoundRatio {
  double gamma = 1.0;
  double ratio = 0.0;   // E[Q_11 | E*] / E[Q_ii | E*], i >= 2
  double stderr_ = 0.0;
  double acceptance = 0.0;
  std::size_t accepted = 0;
};

/// Monte Carlo estimate of the diagonal ratio for uniform row sampling on
/// lower_bound_matrix(d), conditioned on E* = {every coordinate sampled}.
/// All gammas share the same sketches. The denominator averages Q_ii over
/// i >= 2, which are exchangeable given E*.
inline std::vector<LowerBoundRatio> lower_bound_bias_ratio(std::size_t d, std::size_t m,
                                                           std::span<const double> gammas,
                                                           std::size_t replicas,
                                                           std::uint64_t seed,
                                                           unsigned jobs = 1) {
  require(m >= d, Errc::InvalidArgument, "lower-bound experiment needs m >= d");
  require(!gammas.empty(), Errc::InvalidArgument, "at least one gamma is required");
  for (double g : gammas) require(g > 0.0, Errc::InvalidArgument, "gamma must be positive");
  const TallMatrix a = lower_bound_matrix(d);
  SketchSpec spec;
  spec.kind = SketchKind::RowSampling;
  spec.m = m;
  spec.seed = seed;
  spec.probabilities.assign(a.n(), 1.0 / static_cast<double>(a.n()));
  const Sketcher sketcher(a, spec);
  const std::size_t g_count = gammas.size();

  struct Moments {
    double a = 0, b = 0, aa = 0, bb = 0, ab = 0;
  };
  std::vector<Moments> moments(g_count);
  std::size_t accepted = 0;

  using Diagonals = std::vector<std::pair<double, double>>;  // per gamma (Q_11, mean Q_ii)
  for_each_replica(
      replicas, jobs,
      [&](std::size_t r) {
        Diagonals out;
        const Matrix g = gram(sketcher.apply(r));
        for (double gamma : gammas) {
          auto inv = try_spd_inverse(g * gamma);
          if (!inv) return Diagonals{};
          double rest = 0.0;
          for (std::size_t i = 1; i < d; ++i) rest += (*inv)(i, i);
          out.emplace_back((*inv)(0, 0), rest / static_cast<double>(d - 1));
        }
        return out;
      },
      [&](std::size_t, Diagonals diag) {
        if (diag.empty()) return;
        ++accepted;
        for (std::size_t k = 0; k < g_count; ++k) {
          auto& mo = moments[k];
          const auto [q11, qrest] = diag[k];
          mo.a += q11;
          mo.b += qrest;
          mo.aa += q11 * q11;
          mo.bb += qrest * qrest;
          mo.ab += q11 * qrest;
        }
      });

  const double acceptance = static_cast<double>(accepted) / static_cast<double>(replicas);
  if (accepted < 2 || acceptance < 1e-3)
    throw Error(Errc::ConditioningTooRare, "conditioning event E* accepted too rarely");

  std::vector<LowerBoundRatio> out;
  const auto nacc = static_cast<double>(accepted);
  for (std::size_t k = 0; k < g_count; ++k) {
    const auto& mo = moments[k];
    const double ma = mo.a / nacc;
    const double mb = mo.b / nacc;
    const double va = (mo.aa - nacc * ma * ma) / (nacc - 1.0);
    const double vb = (mo.bb - nacc * mb * mb) / (nacc - 1.0);
    const double cab = (mo.ab - nacc * ma * mb) / (nacc - 1.0);
    const double ratio = ma / mb;
    // Delta method for a ratio of means.
    const double var_ratio =
        std::max(0.0, (va - 2.0 * ratio * cab + ratio * ratio * vb) / (nacc * mb * mb));
    out.push_back({gammas[k], ratio, std::sqrt(var_ratio), acceptance, accepted});
  }
  return out;
}

/// The half / three-halves distortion of an exact profile:
/// p_j = l_j / 2d for j < n/2 and 3 l_j / 2d otherwise, renormalized.
inline std::vector<double> half_three_halves_distortion(const LeverageProfile& exact) {
  const std::size_t n = exact.size();
  const double d = static_cast<double>(exact.dim);
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j)
    p[j] = (j < n / 2 ? 0.5 : 1.5) * exact.scores[j] / d;
  normalize_in_place(p);
  return p;
}

/// E[(l_s / p_s - d)^2] for s ~ p: the variance of x^T P x for a row
/// sampling vector x, P the projection onto span(A).
inline double row_sampling_projection_variance(const LeverageProfile& exact,
                                               std::span<const double> p) {
  require(p.size() == exact.size(), Errc::DimensionMismatch, "distribution length must match");
  const double d = static_cast<double>(exact.dim);
  double acc = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] <= 0.0) {
      if (exact.scores[s] > 1e-12) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double dev = exact.scores[s] / p[s] - d;
    acc += p[s] * dev * dev;
  }
  return acc;
}

/// The 2d x d matrix [I; I] / sqrt(2): every leverage score equals 1/2.
inline TallMatrix duplicated_identity_matrix(std::size_t d) {
  require(d >= 1, Errc::ShapeInvalid, "d must be positive");
  Matrix a(2 * d, d);
  for (std::size_t i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(0.5);
    a(d + i, i) = std::sqrt(0.5);
  }
  return TallMatrix(std::move(a));
}

/// Exact variance for the distorted row-sampling construction with n = 2d.
inline double counterexample_row_sampling_variance(std::size_t d) {
  const LeverageProfile exact = exact_leverage_scores(duplicated_identity_matrix(d));
  return row_sampling_projection_variance(exact, half_three_halves_distortion(exact));
}

/// Fraction of trials whose sketched Gram matrix is not an eta-approximation
/// of A^T A.
inline double subspace_embedding_check(const TallMatrix& a, SketchSpec spec, double eta,
                                       std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
  require(trials >= 50, Errc::InvalidArgument, "subspace check needs at least 50 trials");
  spec.seed = seed;
  const Sketcher sketcher(a, std::move(spec));
  const Matrix li = lower_triangular_inverse(cholesky(gram(a.matrix())));
  const Matrix li_t = li.transpose();
  std::size_t failures = 0;
  for_each_replica(
      trials, jobs,
      [&](std::size_t r) {
        const Matrix whitened = symmetrized(li * gram(sketcher.apply(r)) * li_t);
        return relative_error_from_eigenvalues(symmetric_eigenvalues(whitened));
      },
      [&](std::size_t, double err) {
        if (!(err <= eta)) ++failures;
      });
  return static_cast<double>(failures) / static_cast<double>(trials);
}

}  // namespace lessketch

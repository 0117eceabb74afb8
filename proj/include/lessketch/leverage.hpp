#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"

namespace lessketch {

/// Leverage scores l_i of an n x d matrix together with the sampling
/// distribution p_i used to draw sparsifier indices. `approx_factor` bounds
/// the ratio between p_i and l_i / d in both directions.
struct LeverageProfile {
  std::vector<double> scores;
  std::vector<double> distribution;
  double approx_factor = 1.0;
  std::size_t dim = 0;  // d, the number of sparsifier draws per row

  std::size_t size() const noexcept { return scores.size(); }

  /// Checks the structural invariants; `exact` additionally requires
  /// sum(l) = d.
  void validate(bool exact) const {
    require(scores.size() == distribution.size() && !scores.empty(), Errc::DimensionMismatch,
            "profile scores and distribution differ in length");
    require(dim >= 1, Errc::InvalidArgument, "profile dimension must be positive");
    require(approx_factor >= 1.0, Errc::InvalidArgument, "approx_factor must be >= 1");
    double psum = 0.0;
    double lsum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      require(scores[i] >= 0.0 && distribution[i] >= 0.0, Errc::InvalidArgument,
              "profile entries must be non-negative");
      psum += distribution[i];
      lsum += scores[i];
    }
    require(std::abs(psum - 1.0) <= 1e-12, Errc::InvalidArgument,
            "profile distribution must sum to 1");
    if (exact)
      require(std::abs(lsum - static_cast<double>(dim)) <= 1e-8, Errc::InvalidArgument,
              "exact leverage scores must sum to d");
    const double d = static_cast<double>(dim);
    const double slack = 1.0 + 1e-9;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] <= 0.0) continue;
      const double target = scores[i] / d;
      require(distribution[i] * approx_factor * slack >= target &&
                  distribution[i] <= approx_factor * target * slack,
              Errc::InvalidArgument, "distribution violates the approximation factor");
    }
  }
};

inline void normalize_in_place(std::vector<double>& p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  require(total > 0.0, Errc::InvalidArgument, "cannot normalize a zero vector");
  for (double& x : p) x /= total;
}

/// Profile whose distribution is scores / sum(scores); approx_factor is the
/// factor introduced by that renormalization.
inline LeverageProfile profile_from_scores(std::vector<double> scores, std::size_t dim) {
  LeverageProfile out;
  out.dim = dim;
  out.distribution = scores;
  normalize_in_place(out.distribution);
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  const double ratio = total / static_cast<double>(dim);
  out.approx_factor = std::max(ratio, 1.0 / ratio);
  out.scores = std::move(scores);
  return out;
}

/// l_i = ||u_i||^2 for the thin-QR basis U; p_i = l_i / d.
inline LeverageProfile exact_leverage_scores(const TallMatrix& a) {
  const Matrix q = householder_qr(a.matrix()).q;
  std::vector<double> scores(a.n());
  for (std::size_t i = 0; i < a.n(); ++i) {
    auto r = q.row(i);
    scores[i] = dot(r, r);
  }
  LeverageProfile out;
  out.dim = a.d();
  out.distribution.resize(a.n());
  for (std::size_t i = 0; i < a.n(); ++i) out.distribution[i] = scores[i] / static_cast<double>(a.d());
  // Rounding can leave sum(p) a few ulps away from 1.
  normalize_in_place(out.distribution);
  out.scores = std::move(scores);
  out.approx_factor = 1.0;
  return out;
}

/// Uniform distribution over n rows; scores are set to d / n, the leverage of
/// a matrix with perfectly spread rows.
inline LeverageProfile uniform_profile(std::size_t n, std::size_t dim) {
  LeverageProfile out;
  out.dim = dim;
  out.scores.assign(n, static_cast<double>(dim) / static_cast<double>(n));
  out.distribution.assign(n, 1.0 / static_cast<double>(n));
  out.approx_factor = 1.0;
  return out;
}

/// Realized approximation factor max_i max(p_i d / l_i, l_i / (p_i d)) over
/// rows with l_i > 1e-12; +inf if such a row has p_i = 0.
inline double profile_quality(const LeverageProfile& profile, const LeverageProfile& exact) {
  require(profile.size() == exact.size(), Errc::DimensionMismatch,
          "profiles must have the same length");
  const double d = std::accumulate(exact.scores.begin(), exact.scores.end(), 0.0);
  double worst = 1.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double l = exact.scores[i];
    if (l <= 1e-12) continue;
    const double p = profile.distribution[i];
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    const double ratio = p * d / l;
    worst = std::max({worst, ratio, 1.0 / ratio});
  }
  return worst;
}

}  // namespace lessketch

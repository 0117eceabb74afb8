#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/leverage.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/rng.hpp"
#include "lessketch/sketch.hpp"

namespace lessketch {

struct ApproxLeverageOptions {
  std::size_t sketch_rows = 0;
  std::size_t jl_dim = 8;
  std::uint64_t seed = 0;
  /// Take R from the QR of A itself instead of an SRHT sketch of A.
  bool exact_r = false;
  /// Skip the JL compression and use ||a_i^T R^{-1}||^2 directly.
  bool exact_jl = false;
};

/// Scores ||a_i^T R^{-1} G||^2, where R comes from the QR of an SRHT sketch of
/// A and G is a d x k Gaussian matrix scaled by 1/sqrt(k).
inline LeverageProfile approximate_leverage_scores(const TallMatrix& a,
                                                   const ApproxLeverageOptions& opt) {
  const std::size_t n = a.n();
  const std::size_t d = a.d();
  if (!opt.exact_r)
    require(opt.sketch_rows >= 4 * d, Errc::InvalidArgument, "sketch_rows must be at least 4d");
  if (!opt.exact_jl) require(opt.jl_dim >= 8, Errc::InvalidArgument, "jl_dim must be at least 8");

  Matrix r;
  if (opt.exact_r) {
    r = householder_qr(a.matrix()).r;
  } else {
    SketchSpec spec;
    spec.kind = SketchKind::Srht;
    spec.m = opt.sketch_rows;
    spec.seed = opt.seed;
    r = householder_qr(Sketcher(a, spec).apply(0)).r;
  }
  // R^{-1} = (lower-triangular inverse of R^T)^T.
  const Matrix r_inv = lower_triangular_inverse(r.transpose()).transpose();

  Matrix w;
  if (opt.exact_jl) {
    w = r_inv;
  } else {
    const std::size_t k = opt.jl_dim;
    Matrix g(d, k);
    RandomStream stream(opt.seed, 1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (auto& v : g.values()) v = scale * stream.normal();
    w = r_inv * g;
  }

  std::vector<double> scores(n);
  Vector proj;
  for (std::size_t i = 0; i < n; ++i) {
    proj.assign(w.cols(), 0.0);
    auto ai = a.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (ai[j] == 0.0) continue;
      auto wj = w.row(j);
      for (std::size_t c = 0; c < w.cols(); ++c) proj[c] += ai[j] * wj[c];
    }
    scores[i] = dot(proj, proj);
  }
  return profile_from_scores(std::move(scores), d);
}

}  // namespace lessketch

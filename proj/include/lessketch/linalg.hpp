#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/matrix.hpp"

namespace lessketch {

/// A^T A accumulated over rows (zero entries skipped) and then mirrored, so
/// the result is exactly symmetric.
inline Matrix gram(const Matrix& a) {
  const std::size_t d = a.cols();
  Matrix g(d, d);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t p = 0; p < d; ++p) {
      const double rp = r[p];
      if (rp == 0.0) continue;
      double* gp = &g(p, 0);
      for (std::size_t q = p; q < d; ++q) gp[q] += rp * r[q];
    }
  }
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < p; ++q) g(p, q) = g(q, p);
  return g;
}

inline SpdMatrix gram(const TallMatrix& a) { return SpdMatrix(gram(a.matrix())); }

inline Matrix symmetrized(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

/// Lower Cholesky factor, or nullopt when a pivot falls below
/// 1e-14 * trace / dim (the matrix is then treated as singular).
inline std::optional<Matrix> try_cholesky(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n) return std::nullopt;
  const double floor = 1e-14 * std::max(m.trace(), 0.0) / static_cast<double>(n);
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > floor) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

inline Matrix cholesky(const Matrix& m) {
  auto l = try_cholesky(m);
  if (!l) throw Error(Errc::NotPositiveDefinite, "Cholesky pivot below floor");
  return *std::move(l);
}

inline Matrix lower_triangular_inverse(const Matrix& l) {
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    inv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s += l(i, k) * inv(k, j);
      inv(i, j) = -s / l(i, i);
    }
  }
  return inv;
}

/// M^{-1} from its lower Cholesky factor: L^{-T} L^{-1}.
inline Matrix inverse_from_cholesky(const Matrix& l) {
  const std::size_t n = l.rows();
  const Matrix li = lower_triangular_inverse(l);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = j; k < n; ++k) s += li(k, i) * li(k, j);
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

inline std::optional<Matrix> try_spd_inverse(const Matrix& m) {
  auto l = try_cholesky(m);
  if (!l) return std::nullopt;
  return inverse_from_cholesky(*l);
}

/// Throws NotPositiveDefinite; callers in the estimator layer use
/// try_spd_inverse instead and record the replica as not invertible.
inline SpdMatrix spd_inverse(const SpdMatrix& m) {
  return SpdMatrix(inverse_from_cholesky(cholesky(m.matrix())));
}

/// Solves L x = b for lower-triangular L.
inline Vector solve_lower(const Matrix& l, std::span<const double> b) {
  Vector x(b.begin(), b.end());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

/// Solves L^T x = b for lower-triangular L.
inline Vector solve_lower_transpose(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

inline Vector spd_solve(const Matrix& m, std::span<const double> b) {
  const Matrix l = cholesky(m);
  return solve_lower_transpose(l, solve_lower(l, b));
}

struct ThinQr {
  Matrix q;  // n x k, orthonormal columns
  Matrix r;  // k x k upper triangular, non-negative diagonal
};

/// Householder thin QR with the sign of each column fixed so diag(R) >= 0.
/// Throws RankDeficient when |R_jj| <= 1e-10 * max_i |R_ii|.
inline ThinQr householder_qr(const Matrix& a) {
  const std::size_t n = a.rows();
  const std::size_t k = a.cols();
  require(k <= n, Errc::ShapeInvalid, "thin QR needs rows >= cols");
  Matrix w = a;
  std::vector<Vector> reflectors(k);
  Vector beta(k, 0.0);

  for (std::size_t j = 0; j < k; ++j) {
    double norm_sq = 0.0;
    for (std::size_t i = j; i < n; ++i) norm_sq += w(i, j) * w(i, j);
    const double norm = std::sqrt(norm_sq);
    Vector v(n - j, 0.0);
    if (norm == 0.0) {
      reflectors[j] = std::move(v);
      continue;
    }
    const double alpha = w(j, j) >= 0.0 ? -norm : norm;
    for (std::size_t i = j; i < n; ++i) v[i - j] = w(i, j);
    v[0] -= alpha;
    const double vnorm_sq = dot(v, v);
    if (vnorm_sq == 0.0) {
      reflectors[j] = std::move(v);
      continue;
    }
    beta[j] = 2.0 / vnorm_sq;
    for (std::size_t c = j; c < k; ++c) {
      double s = 0.0;
      for (std::size_t i = j; i < n; ++i) s += v[i - j] * w(i, c);
      s *= beta[j];
      for (std::size_t i = j; i < n; ++i) w(i, c) -= s * v[i - j];
    }
    reflectors[j] = std::move(v);
  }

  Matrix r(k, k);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) r(i, j) = w(i, j);
    max_diag = std::max(max_diag, std::abs(r(i, i)));
  }
  for (std::size_t i = 0; i < k; ++i)
    if (!(std::abs(r(i, i)) > 1e-10 * max_diag))
      throw Error(Errc::RankDeficient, "QR pivot underflow");

  // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of I.
  Matrix q(n, k);
  for (std::size_t i = 0; i < k; ++i) q(i, i) = 1.0;
  for (std::size_t jj = k; jj-- > 0;) {
    const Vector& v = reflectors[jj];
    if (beta[jj] == 0.0) continue;
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t i = jj; i < n; ++i) s += v[i - jj] * q(i, c);
      s *= beta[jj];
      if (s == 0.0) continue;
      for (std::size_t i = jj; i < n; ++i) q(i, c) -= s * v[i - jj];
    }
  }

  for (std::size_t j = 0; j < k; ++j) {
    if (r(j, j) >= 0.0) continue;
    for (std::size_t c = j; c < k; ++c) r(j, c) = -r(j, c);
    for (std::size_t i = 0; i < n; ++i) q(i, j) = -q(i, j);
  }
  return {std::move(q), std::move(r)};
}

inline OrthonormalBasis orthonormal_basis(const TallMatrix& a) {
  return OrthonormalBasis(householder_qr(a.matrix()).q);
}

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
inline Vector symmetric_eigenvalues(const Matrix& m) {
  const std::size_t n = m.rows();
  require(m.cols() == n, Errc::DimensionMismatch, "eigenvalues need a square matrix");
  Matrix a = symmetrized(m);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

/// Operator norm of a symmetric matrix from its extreme eigenvalues.
inline double symmetric_operator_norm(const Matrix& m) {
  const Vector eig = symmetric_eigenvalues(m);
  return eig.empty() ? 0.0 : std::max(std::abs(eig.front()), std::abs(eig.back()));
}

/// Largest singular value by power iteration on M^T M (relative change
/// below 1e-9 or 1e4 iterations). Two start vectors guard against a start
/// orthogonal to the top singular vector.
inline double spectral_norm(const Matrix& m) {
  const std::size_t n = m.cols();
  if (n == 0 || m.rows() == 0) return 0.0;
  const Matrix mt = m.transpose();
  double best = 0.0;
  for (int start = 0; start < 2; ++start) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = start == 0 ? 1.0 + 0.37 * static_cast<double>(i) / static_cast<double>(n)
                        : ((i % 2 == 0) ? 1.0 : -1.0) / (1.0 + static_cast<double>(i));
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    double sigma = 0.0;
    for (int it = 0; it < 10000; ++it) {
      Vector w = mt * std::span<const double>(m * std::span<const double>(v));
      const double nw = norm2(w);
      if (nw == 0.0) {
        sigma = 0.0;
        break;
      }
      const double next = std::sqrt(nw);
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
      const bool done = it > 0 && std::abs(next - sigma) <= 1e-9 * next;
      sigma = next;
      if (done) break;
    }
    best = std::max(best, sigma);
  }
  return best;
}

}  // namespace lessketch

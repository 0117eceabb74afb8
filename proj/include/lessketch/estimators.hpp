#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/parallel.hpp"
#include "lessketch/sketch.hpp"

namespace lessketch {

inline constexpr double kDefaultClipThreshold = 10.0;
inline constexpr std::size_t kBatchCount = 10;

/// One realization of (gamma * A^T S^T S A)^{-1}; `matrix` is empty when the
/// sketched Gram matrix failed its Cholesky factorization.
struct InverseEstimate {
  std::optional<Matrix> matrix;
  bool invertible = false;
  double gamma = 1.0;
  SketchKind kind = SketchKind::Gaussian;
  std::size_t m = 0;
  std::uint64_t replica = 0;
};

/// m / (m - d), the near-unbiasing scale for sub-gaussian and LESS sketches.
inline double debiasing_gamma(std::size_t m, std::size_t d) {
  if (m <= d) throw Error(Errc::SketchSmallerThanD, "debiasing needs m > d");
  return static_cast<double>(m) / static_cast<double>(m - d);
}

inline InverseEstimate debiased_inverse(const Sketcher& sketcher, std::uint64_t replica,
                                        std::optional<double> gamma = std::nullopt) {
  const std::size_t m = sketcher.spec().m;
  const std::size_t d = sketcher.data().d();
  const double g = gamma.value_or(debiasing_gamma(m, d));
  if (m <= d) throw Error(Errc::SketchSmallerThanD, "debiasing needs m > d");
  InverseEstimate out;
  out.gamma = g;
  out.kind = sketcher.spec().kind;
  out.m = m;
  out.replica = replica;
  Matrix sketched_gram = gram(sketcher.apply(replica));
  sketched_gram *= g;
  out.matrix = try_spd_inverse(sketched_gram);
  out.invertible = out.matrix.has_value();
  return out;
}

inline InverseEstimate debiased_inverse(const TallMatrix& a, const SketchSpec& spec,
                                        std::uint64_t replica,
                                        std::optional<double> gamma = std::nullopt) {
  return debiased_inverse(Sketcher(a, spec), replica, gamma);
}

/// max(lambda_max - 1, 1 / lambda_min - 1, 0) for the eigenvalues of a
/// whitened estimate; +inf when lambda_min <= 0.
inline double relative_error_from_eigenvalues(const Vector& eig) {
  if (eig.empty()) return 0.0;
  if (!(eig.front() > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max({eig.back() - 1.0, 1.0 / eig.front() - 1.0, 0.0});
}

/// Smallest eta with C / (1 + eta) <= C_tilde <= (1 + eta) C, computed on
/// L^{-1} C_tilde L^{-T} where C = L L^T.
inline double spectral_rel_error(const Matrix& c_tilde, const Matrix& c) {
  require(c_tilde.same_shape(c) && c.rows() == c.cols(), Errc::DimensionMismatch,
          "spectral_rel_error needs matching square matrices");
  const Matrix l = cholesky(c);
  const Matrix li = lower_triangular_inverse(l);
  const Matrix whitened = li * c_tilde * li.transpose();
  return relative_error_from_eigenvalues(symmetric_eigenvalues(whitened));
}

inline double spectral_rel_error(const SpdMatrix& c_tilde, const SpdMatrix& c) {
  return spectral_rel_error(c_tilde.matrix(), c.matrix());
}

/// tr(C Q_bar).
inline double functional_query_trace(const Matrix& q_bar, const Matrix& c) {
  require(q_bar.rows() == q_bar.cols() && q_bar.same_shape(c), Errc::DimensionMismatch,
          "functional query needs matching square matrices");
  double t = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t k = 0; k < c.cols(); ++k) t += c(i, k) * q_bar(k, i);
  return t;
}

/// Monte Carlo summary of an inverse-covariance estimator, reported in the
/// whitened frame H^{1/2} E H^{1/2} (H = A^T A) where the target is I.
struct BiasReport {
  std::string kind;
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t q = 1;
  std::size_t replicas = 0;
  double gamma = 1.0;
  double bias_estimate = 0.0;
  double bias_stderr = 0.0;
  double approx_error_median = 0.0;
  double approx_error_q95 = 0.0;
  double failure_rate = 0.0;
  std::size_t replicas_used = 0;
  double clip_threshold = kDefaultClipThreshold;
  /// tr(whitened mean) / d and its batch-means standard error.
  double whitened_trace = 0.0;
  double whitened_trace_stderr = 0.0;
};

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string bias_report_csv_header() {
  return "kind,m,d,n,q,replicas,gamma,bias,bias_se,eta_median,eta_q95,fail_rate";
}

inline std::string to_csv_row(const BiasReport& r) {
  std::string row = r.kind;
  for (std::size_t v : {r.m, r.d, r.n, r.q, r.replicas}) row += "," + std::to_string(v);
  for (double v : {r.gamma, r.bias_estimate, r.bias_stderr, r.approx_error_median,
                   r.approx_error_q95, r.failure_rate})
    row += "," + format_number(v);
  return row;
}

/// Empirical quantile with linear interpolation; +inf entries sort last.
inline double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[hi] == values[lo]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// Accepted replicas in the whitened frame, split into contiguous batches.
struct WhitenedSample {
  Matrix mean;
  std::vector<Matrix> batch_means;  // only batches with at least one replica
  std::vector<double> eta;          // per replica, +inf if not invertible
  std::size_t accepted = 0;
  std::size_t total = 0;
};

namespace detail {

struct ReplicaOutcome {
  Matrix whitened;
  double eta = std::numeric_limits<double>::infinity();
  bool invertible = false;
};

inline ReplicaOutcome whiten_replica(const Sketcher& sketcher, std::uint64_t replica,
                                     const Matrix& chol_h, double gamma) {
  ReplicaOutcome out;
  auto est = debiased_inverse(sketcher, replica, gamma);
  if (!est.invertible) return out;
  out.invertible = true;
  out.whitened = symmetrized(chol_h.transpose() * (*est.matrix) * chol_h);
  out.eta = relative_error_from_eigenvalues(symmetric_eigenvalues(out.whitened));
  return out;
}

}  // namespace detail

/// Runs `replicas` independent estimates and conditions on the event
/// {invertible and eta <= clip_threshold}.
inline WhitenedSample whitened_replicas(const Sketcher& sketcher, const Matrix& chol_h,
                                        double gamma, std::size_t replicas,
                                        double clip_threshold, unsigned jobs = 1) {
  const std::size_t d = chol_h.rows();
  WhitenedSample out;
  out.total = replicas;
  out.mean = Matrix(d, d);
  std::vector<Matrix> batch_sum(kBatchCount, Matrix(d, d));
  std::vector<std::size_t> batch_count(kBatchCount, 0);
  out.eta.reserve(replicas);
  for_each_replica(
      replicas, jobs,
      [&](std::size_t r) { return detail::whiten_replica(sketcher, r, chol_h, gamma); },
      [&](std::size_t r, detail::ReplicaOutcome outcome) {
        out.eta.push_back(outcome.eta);
        if (!outcome.invertible || !(outcome.eta <= clip_threshold)) return;
        const std::size_t b = r * kBatchCount / replicas;
        batch_sum[b] += outcome.whitened;
        ++batch_count[b];
        out.mean += outcome.whitened;
        ++out.accepted;
      });
  if (out.accepted == 0) throw Error(Errc::AllReplicasFailed, "no replica was accepted");
  out.mean *= 1.0 / static_cast<double>(out.accepted);
  for (std::size_t b = 0; b < kBatchCount; ++b) {
    if (batch_count[b] == 0) continue;
    batch_sum[b] *= 1.0 / static_cast<double>(batch_count[b]);
    out.batch_means.push_back(std::move(batch_sum[b]));
  }
  return out;
}

/// Batch-means standard error of a matrix-valued mean, measured in operator
/// norm: sqrt(sum_b ||M_b - M||^2 / (B (B - 1))).
inline double batch_operator_stderr(const std::vector<Matrix>& batches, const Matrix& mean) {
  const std::size_t count = batches.size();
  if (count < 2) return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (const auto& b : batches) {
    const double dev = symmetric_operator_norm(b - mean);
    acc += dev * dev;
  }
  return std::sqrt(acc / static_cast<double>(count * (count - 1)));
}

inline double batch_scalar_stderr(const std::vector<double>& values) {
  const std::size_t count = values.size();
  if (count < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(count);
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(count - 1) / static_cast<double>(count));
}

inline BiasReport summarize(const WhitenedSample& sample, const Sketcher& sketcher, double gamma,
                            double clip_threshold) {
  const std::size_t d = sample.mean.rows();
  BiasReport r;
  r.kind = std::string(to_string(sketcher.spec().kind));
  r.m = sketcher.spec().m;
  r.d = d;
  r.n = sketcher.data().n();
  r.q = 1;
  r.replicas = sample.total;
  r.gamma = gamma;
  r.clip_threshold = clip_threshold;
  r.replicas_used = sample.accepted;
  r.failure_rate =
      static_cast<double>(sample.total - sample.accepted) / static_cast<double>(sample.total);
  r.bias_estimate = symmetric_operator_norm(sample.mean - Matrix::identity(d));
  r.bias_stderr = batch_operator_stderr(sample.batch_means, sample.mean);
  r.approx_error_median = quantile(sample.eta, 0.5);
  r.approx_error_q95 = quantile(sample.eta, 0.95);
  r.whitened_trace = sample.mean.trace() / static_cast<double>(d);
  std::vector<double> traces;
  for (const auto& b : sample.batch_means) traces.push_back(b.trace() / static_cast<double>(d));
  r.whitened_trace_stderr = batch_scalar_stderr(traces);
  return r;
}

/// Monte Carlo inversion bias of the (conditioned) estimator.
inline BiasReport inversion_bias_report(const TallMatrix& a, SketchSpec spec, std::size_t replicas,
                                        std::uint64_t master_seed,
                                        double clip_threshold = kDefaultClipThreshold,
                                        std::optional<double> gamma = std::nullopt,
                                        unsigned jobs = 1) {
  require(replicas >= 100, Errc::InvalidArgument, "bias report needs at least 100 replicas");
  spec.seed = master_seed;
  const Sketcher sketcher(a, std::move(spec));
  const double g = gamma.value_or(debiasing_gamma(sketcher.spec().m, a.d()));
  const Matrix chol_h = cholesky(gram(a.matrix()));
  const auto sample = whitened_replicas(sketcher, chol_h, g, replicas, clip_threshold, jobs);
  return summarize(sample, sketcher, g, clip_threshold);
}

struct AveragedInverse {
  Matrix estimate;
  /// spectral_rel_error(estimate, (A^T A)^{-1})
  double error = 0.0;
  BiasReport report;
};

/// (1/q') sum of the q' accepted replicas' debiased inverses, where a replica
/// is accepted when invertible and eta <= clip_threshold.
inline AveragedInverse averaged_inverse(const TallMatrix& a, SketchSpec spec, std::size_t q,
                                        std::uint64_t master_seed,
                                        double clip_threshold = kDefaultClipThreshold,
                                        std::optional<double> gamma = std::nullopt,
                                        unsigned jobs = 1) {
  require(q >= 1, Errc::InvalidArgument, "q must be >= 1");
  spec.seed = master_seed;
  const Sketcher sketcher(a, std::move(spec));
  const double g = gamma.value_or(debiasing_gamma(sketcher.spec().m, a.d()));
  const Matrix chol_h = cholesky(gram(a.matrix()));
  const auto sample = whitened_replicas(sketcher, chol_h, g, q, clip_threshold, jobs);

  AveragedInverse out;
  out.report = summarize(sample, sketcher, g, clip_threshold);
  out.report.q = q;
  // Back from the whitened frame: E = L^{-T} W L^{-1}.
  const Matrix li = lower_triangular_inverse(chol_h);
  out.estimate = symmetrized(li.transpose() * sample.mean * li);
  out.error = relative_error_from_eigenvalues(symmetric_eigenvalues(sample.mean));
  return out;
}

struct HaarConstant {
  double c_hat = 0.0;
  double c_stderr = 0.0;
  double isotropy_resid = 0.0;
  double isotropy_stderr = 0.0;
};

/// Estimates c with E[(U^T S^T S U)^{-1}] = c I for an orthogonally
/// invariant sketch (Haar by default; Gaussian also qualifies).
inline HaarConstant haar_constant_estimate(const OrthonormalBasis& u, std::size_t m,
                                           std::size_t replicas, std::uint64_t seed,
                                           SketchKind kind = SketchKind::Haar,
                                           unsigned jobs = 1) {
  require(m > u.d(), Errc::SketchSmallerThanD, "Haar constant needs m > d");
  SketchSpec spec;
  spec.kind = kind;
  spec.m = m;
  spec.seed = seed;
  const TallMatrix a(u.matrix());
  const Sketcher sketcher(a, spec);
  const Matrix chol_h = cholesky(gram(a.matrix()));
  const auto sample = whitened_replicas(sketcher, chol_h, 1.0, replicas,
                                        std::numeric_limits<double>::infinity(), jobs);
  const std::size_t d = u.d();
  const double dd = static_cast<double>(d);
  HaarConstant out;
  out.c_hat = sample.mean.trace() / dd;
  const Matrix resid = sample.mean - Matrix::identity(d) * out.c_hat;
  out.isotropy_resid = symmetric_operator_norm(resid) / out.c_hat;
  std::vector<Matrix> batch_resid;
  std::vector<double> batch_c;
  for (const auto& b : sample.batch_means) {
    const double cb = b.trace() / dd;
    batch_c.push_back(cb);
    batch_resid.push_back(b - Matrix::identity(d) * cb);
  }
  out.c_stderr = batch_scalar_stderr(batch_c);
  out.isotropy_stderr = batch_operator_stderr(batch_resid, resid) / out.c_hat;
  return out;
}

}  // namespace lessketch

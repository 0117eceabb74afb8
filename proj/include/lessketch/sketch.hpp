#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/hadamard.hpp"
#include "lessketch/leverage.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/rng.hpp"

namespace lessketch {

enum class SketchKind {
  Gaussian,
  Rademacher,
  UniformSubgaussian,
  Haar,
  RowSampling,
  Less,
  Srht,
  ObliviousSparse,
};

/// Entry law of the dense vector x that LESS sparsifies.
enum class SubgaussianLaw { Rademacher, Gaussian, Uniform };

inline std::string_view to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::Gaussian: return "gaussian";
    case SketchKind::Rademacher: return "rademacher";
    case SketchKind::UniformSubgaussian: return "uniform";
    case SketchKind::Haar: return "haar";
    case SketchKind::RowSampling: return "rowsampling";
    case SketchKind::Less: return "less";
    case SketchKind::Srht: return "srht";
    case SketchKind::ObliviousSparse: return "sparse";
  }
  return "unknown";
}

inline std::string_view to_string(SubgaussianLaw law) {
  switch (law) {
    case SubgaussianLaw::Rademacher: return "rademacher";
    case SubgaussianLaw::Gaussian: return "gaussian";
    case SubgaussianLaw::Uniform: return "uniform";
  }
  return "unknown";
}

/// Sketches whose entries are drawn from a Gaussian at some point; their
/// output is reproducible only up to libm rounding across platforms.
inline bool uses_gaussian_variates(SketchKind kind, SubgaussianLaw law) {
  return kind == SketchKind::Gaussian || kind == SketchKind::Haar ||
         (kind == SketchKind::Less && law == SubgaussianLaw::Gaussian);
}

struct SketchSpec {
  SketchKind kind = SketchKind::Gaussian;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  /// RowSampling: probability of each row of A.
  std::vector<double> probabilities;
  /// LESS: sampling profile for the sparsifier. Ignored when
  /// `hadamard_preprocess` is set (the transformed rows are sampled uniformly).
  std::optional<LeverageProfile> profile;
  /// ObliviousSparse: expected nonzeros s per column of sqrt(m) S, 0 < s <= m.
  double sparsity = 1.0;
  SubgaussianLaw law = SubgaussianLaw::Rademacher;
  /// LESS: independent Bernoulli(l_i) pattern instead of d draws with replacement.
  bool bernoulli_sparsifier = false;
  /// LESS: randomized Hadamard preprocessing followed by uniform sparsification.
  bool hadamard_preprocess = false;
};

/// One leverage score sparsifier xi: the distinct indices hit by d draws,
/// their multiplicities b_i and weights sqrt(b_i / (d p_i)).
struct SparsifierDraw {
  std::vector<std::size_t> support;
  std::vector<double> weights;
  std::vector<unsigned> counts;
};

namespace detail {

inline double draw_entry(SubgaussianLaw law, RandomStream& stream) {
  switch (law) {
    case SubgaussianLaw::Rademacher: return stream.sign();
    case SubgaussianLaw::Gaussian: return stream.normal();
    case SubgaussianLaw::Uniform: return std::sqrt(3.0) * (2.0 * stream.uniform() - 1.0);
  }
  return 0.0;
}

inline void axpy(std::span<double> y, double alpha, std::span<const double> x) {
  for (std::size_t c = 0; c < y.size(); ++c) y[c] += alpha * x[c];
}

/// Uniform probabilities are drawn with `below` rather than the alias table.
inline bool is_uniform(std::span<const double> p) {
  if (p.empty()) return false;
  return std::all_of(p.begin(), p.end(), [&](double x) { return x == p[0]; });
}

}  // namespace detail

/// d categorical draws from the profile (via a prebuilt alias table),
/// aggregated into counts and weights.
inline SparsifierDraw draw_sparsifier(const LeverageProfile& profile, const AliasTable& table,
                                      RandomStream& stream) {
  const std::size_t d = profile.dim;
  std::vector<std::size_t> draws(d);
  for (auto& s : draws) s = table.sample(stream);
  std::sort(draws.begin(), draws.end());
  SparsifierDraw out;
  for (std::size_t t = 0; t < d;) {
    std::size_t u = t;
    while (u < d && draws[u] == draws[t]) ++u;
    const std::size_t index = draws[t];
    const auto count = static_cast<unsigned>(u - t);
    out.support.push_back(index);
    out.counts.push_back(count);
    out.weights.push_back(
        std::sqrt(count / (static_cast<double>(d) * profile.distribution[index])));
    t = u;
  }
  return out;
}

inline SparsifierDraw draw_sparsifier(const LeverageProfile& profile, RandomStream& stream) {
  return draw_sparsifier(profile, AliasTable(profile.distribution), stream);
}

/// Applies a sketch to a fixed data matrix. Per-matrix preprocessing (alias
/// tables, validation) happens once in the constructor; `apply` is a pure
/// function of the replica index and safe to call concurrently. The data
/// matrix must outlive the sketcher.
class Sketcher {
 public:
  Sketcher(const TallMatrix& a, SketchSpec spec) : a_(&a), spec_(std::move(spec)) {
    require(spec_.m >= 1, Errc::InvalidArgument, "sketch size m must be >= 1");
    switch (spec_.kind) {
      case SketchKind::Haar:
        if (spec_.m > a.n()) throw Error(Errc::SketchTooLarge, "Haar sketch needs m <= n");
        break;
      case SketchKind::RowSampling: {
        require(spec_.probabilities.size() == a.n(), Errc::DimensionMismatch,
                "row sampling probabilities must have length n");
        check_distribution(spec_.probabilities);
        uniform_ = detail::is_uniform(spec_.probabilities);
        if (!uniform_) table_ = AliasTable(spec_.probabilities);
        break;
      }
      case SketchKind::Less: {
        if (spec_.hadamard_preprocess) break;
        require(spec_.profile.has_value(), Errc::InvalidArgument, "LESS sketch needs a profile");
        const auto& prof = *spec_.profile;
        require(prof.size() == a.n(), Errc::DimensionMismatch, "profile length must equal n");
        require(prof.dim >= 1, Errc::InvalidArgument, "profile dimension must be positive");
        check_distribution(prof.distribution);
        table_ = AliasTable(prof.distribution);
        break;
      }
      case SketchKind::ObliviousSparse:
        require(spec_.sparsity > 0.0 && spec_.sparsity <= static_cast<double>(spec_.m),
                Errc::InvalidArgument, "oblivious sparsity must satisfy 0 < s <= m");
        break;
      default:
        break;
    }
  }

  const SketchSpec& spec() const noexcept { return spec_; }
  const TallMatrix& data() const noexcept { return *a_; }

  /// The m x d matrix S A for replica `replica` (stream (seed, replica)).
  Matrix apply(std::uint64_t replica) const {
    RandomStream stream(spec_.seed, replica);
    switch (spec_.kind) {
      case SketchKind::Gaussian: return apply_dense(SubgaussianLaw::Gaussian, stream);
      case SketchKind::Rademacher: return apply_dense(SubgaussianLaw::Rademacher, stream);
      case SketchKind::UniformSubgaussian: return apply_dense(SubgaussianLaw::Uniform, stream);
      case SketchKind::Haar: return apply_haar(stream);
      case SketchKind::RowSampling: return apply_row_sampling(stream);
      case SketchKind::Less: return apply_less(stream);
      case SketchKind::Srht: return apply_srht(stream);
      case SketchKind::ObliviousSparse: return apply_oblivious_sparse(stream);
    }
    return {};
  }

 private:
  static void check_distribution(std::span<const double> p) {
    double total = 0.0;
    for (double x : p) {
      require(x >= 0.0, Errc::InvalidArgument, "probabilities must be non-negative");
      total += x;
    }
    require(std::abs(total - 1.0) <= 1e-12, Errc::InvalidArgument,
            "probabilities must sum to 1 within 1e-12");
  }

  // Entries of sqrt(m) S are drawn column by column: all m entries that
  // multiply row i of A, then row i + 1. Columns are drawn a block at a time
  // and each output row accumulates the block in order of i.
  Matrix apply_dense(SubgaussianLaw law, RandomStream& stream) const {
    switch (law) {
      case SubgaussianLaw::Rademacher:
        return apply_signs(stream);
      case SubgaussianLaw::Gaussian:
        return apply_dense_with(stream, [](RandomStream& s, std::span<double> out) {
          for (double& v : out) v = s.normal();
        });
      case SubgaussianLaw::Uniform:
        return apply_dense_with(stream, [](RandomStream& s, std::span<double> out) {
          for (double& v : out) v = detail::draw_entry(SubgaussianLaw::Uniform, s);
        });
    }
    return {};
  }

  template <class Draw>
  Matrix apply_dense_with(RandomStream& stream, Draw draw) const {
    const Matrix& a = a_->matrix();
    const std::size_t n = a.rows();
    const std::size_t m = spec_.m;
    const std::size_t d = a.cols();
    constexpr std::size_t kBlock = 64;
    Matrix out(m, d);
    std::vector<double> block(kBlock * m);
    for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
      const std::size_t width = std::min(kBlock, n - i0);
      draw(stream, std::span<double>(block).first(width * m));
      for (std::size_t j = 0; j < m; ++j) {
        double* __restrict o = out.row(j).data();
        for (std::size_t b = 0; b < width; ++b) {
          const double w = block[b * m + j];
          const double* __restrict src = a.row(i0 + b).data();
          for (std::size_t c = 0; c < d; ++c) o[c] += w * src[c];
        }
      }
    }
    out *= 1.0 / std::sqrt(static_cast<double>(m));
    return out;
  }

  // Rows of A are taken eight at a time. All 256 signed sums of the eight
  // rows go into a table, and each output row adds the entry picked by one
  // random byte. Byte j of the group is the sign pattern of output row j.
  Matrix apply_signs(RandomStream& stream) const {
    const Matrix& a = a_->matrix();
    const std::size_t n = a.rows();
    const std::size_t m = spec_.m;
    const std::size_t d = a.cols();
    Matrix out(m, d);
    std::vector<double> table(256 * d);
    std::vector<std::uint8_t> bytes(8 * ((m + 7) / 8));
    for (std::size_t i0 = 0; i0 < n; i0 += 8) {
      const std::size_t width = std::min<std::size_t>(8, n - i0);
      const std::size_t entries = std::size_t{1} << width;
      // table[x] = sum_k (1 - 2 bit_k(x)) a_{i0+k}
      std::fill_n(table.begin(), d, 0.0);
      for (std::size_t k = 0; k < width; ++k) {
        const double* src = a.row(i0 + k).data();
        for (std::size_t c = 0; c < d; ++c) table[c] += src[c];
      }
      for (std::size_t x = 1; x < entries; ++x) {
        const std::size_t top = std::bit_width(x) - 1;
        const double* base = &table[(x ^ (std::size_t{1} << top)) * d];
        const double* src = a.row(i0 + top).data();
        double* dst = &table[x * d];
        for (std::size_t c = 0; c < d; ++c) dst[c] = base[c] - 2.0 * src[c];
      }
      for (std::size_t w = 0; w < bytes.size(); w += 8) {
        const std::uint64_t bits = stream.next_u64();
        for (std::size_t k = 0; k < 8; ++k) bytes[w + k] = static_cast<std::uint8_t>(bits >> (8 * k));
      }
      const std::size_t mask = entries - 1;
      for (std::size_t j = 0; j < m; ++j) {
        double* __restrict o = out.row(j).data();
        const double* __restrict t = &table[(bytes[j] & mask) * d];
        for (std::size_t c = 0; c < d; ++c) o[c] += t[c];
      }
    }
    out *= 1.0 / std::sqrt(static_cast<double>(m));
    return out;
  }

  Matrix apply_haar(RandomStream& stream) const {
    const Matrix& a = a_->matrix();
    const std::size_t n = a.rows();
    const std::size_t m = spec_.m;
    Matrix g(n, m);
    for (double& x : g.values()) x = stream.normal();
    // Sign-fixed QR of a Gaussian matrix yields a Haar-distributed Q.
    const Matrix q = householder_qr(g).q;
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    Matrix out(m, a.cols());
    for (std::size_t i = 0; i < n; ++i) {
      auto qi = q.row(i);
      for (std::size_t j = 0; j < m; ++j) detail::axpy(out.row(j), scale * qi[j], a.row(i));
    }
    return out;
  }

  Matrix apply_row_sampling(RandomStream& stream) const {
    const Matrix& a = a_->matrix();
    const std::size_t m = spec_.m;
    Matrix out(m, a.cols());
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t s = uniform_ ? stream.below(a.rows()) : table_.sample(stream);
      const double p = spec_.probabilities[s];
      if (!(p > 0.0)) throw Error(Errc::ZeroProbabilityRow, "sampled a zero-probability row");
      detail::axpy(out.row(j), 1.0 / std::sqrt(static_cast<double>(m) * p), a.row(s));
    }
    return out;
  }

  Matrix apply_srht(RandomStream& stream) const {
    const Matrix mixed = randomized_hadamard(a_->matrix(), stream);
    const std::size_t padded = mixed.rows();
    const std::size_t m = spec_.m;
    const double scale = std::sqrt(static_cast<double>(padded) / static_cast<double>(m));
    Matrix out(m, mixed.cols());
    for (std::size_t j = 0; j < m; ++j)
      detail::axpy(out.row(j), scale, mixed.row(stream.below(padded)));
    return out;
  }

  Matrix apply_oblivious_sparse(RandomStream& stream) const {
    const Matrix& a = a_->matrix();
    const std::size_t m = spec_.m;
    const double keep = spec_.sparsity / static_cast<double>(m);
    // Bernoulli(1) keeps everything: the Rademacher sketch, draw for draw.
    if (keep >= 1.0) return apply_dense(SubgaussianLaw::Rademacher, stream);
    // sqrt(m/s) * b * r, then the 1/sqrt(m) row scaling.
    const double value = std::sqrt(1.0 / spec_.sparsity);
    Matrix out(m, a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      auto src = a.row(i);
      for (std::size_t j = 0; j < m; ++j) {
        if (!stream.bernoulli(keep)) continue;
        detail::axpy(out.row(j), value * stream.sign(), src);
      }
    }
    return out;
  }

  Matrix apply_less(RandomStream& stream) const {
    if (spec_.hadamard_preprocess) {
      const Matrix mixed = randomized_hadamard(a_->matrix(), stream);
      const LeverageProfile flat = uniform_profile(mixed.rows(), mixed.cols());
      return less_rows(mixed, flat, nullptr, stream);
    }
    return less_rows(a_->matrix(), *spec_.profile, &table_, stream);
  }

  Matrix less_rows(const Matrix& a, const LeverageProfile& profile, const AliasTable* table,
                   RandomStream& stream) const {
    const std::size_t m = spec_.m;
    const std::size_t d = profile.dim;
    const double row_scale = 1.0 / std::sqrt(static_cast<double>(m));
    Matrix out(m, a.cols());
    if (spec_.bernoulli_sparsifier) {
      // xi_i = b_i / sqrt(q_i), b_i ~ Bernoulli(q_i), q_i = min(1, d p_i).
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
          const double q = std::min(1.0, static_cast<double>(d) * profile.distribution[i]);
          if (q <= 0.0 || !stream.bernoulli(q)) continue;
          const double x = detail::draw_entry(spec_.law, stream);
          detail::axpy(out.row(j), row_scale * x / std::sqrt(q), a.row(i));
        }
      }
      return out;
    }
    std::vector<std::size_t> draws(d);
    for (std::size_t j = 0; j < m; ++j) {
      for (auto& s : draws) s = table ? table->sample(stream) : stream.below(a.rows());
      std::sort(draws.begin(), draws.end());
      auto dst = out.row(j);
      for (std::size_t t = 0; t < d;) {
        std::size_t u = t;
        while (u < d && draws[u] == draws[t]) ++u;
        const std::size_t index = draws[t];
        const double xi =
            std::sqrt(static_cast<double>(u - t) /
                      (static_cast<double>(d) * profile.distribution[index]));
        const double x = detail::draw_entry(spec_.law, stream);
        detail::axpy(dst, row_scale * x * xi, a.row(index));
        t = u;
      }
    }
    return out;
  }

  const TallMatrix* a_;
  SketchSpec spec_;
  AliasTable table_;
  bool uniform_ = false;
};

inline Matrix apply_sketch(const TallMatrix& a, const SketchSpec& spec, std::uint64_t replica = 0) {
  return Sketcher(a, spec).apply(replica);
}

}  // namespace lessketch

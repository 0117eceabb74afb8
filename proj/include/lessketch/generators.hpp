#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "lessketch/diagnostics.hpp"
#include "lessketch/error.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/rng.hpp"

namespace lessketch {

enum class MatrixKind { Gaussian, HeavyTail, CoherentBlock, Theorem4 };

inline std::string_view to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::Gaussian: return "gaussian";
    case MatrixKind::HeavyTail: return "heavy_tail";
    case MatrixKind::CoherentBlock: return "coherent_block";
    case MatrixKind::Theorem4: return "theorem4";
  }
  return "?";
}

// Row i of every random generator uses its own stream, so a matrix with more
// rows extends one with fewer.
inline TallMatrix gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(d >= 1 && n >= d, Errc::ShapeInvalid, "gaussian matrix needs n >= d >= 1");
  Matrix a(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream stream(seed, i);
    for (auto& v : a.row(i)) v = stream.normal();
  }
  return TallMatrix(std::move(a));
}

/// Gaussian rows divided by sqrt(chi^2_2 / 2); chi^2_2 / 2 is Exp(1).
inline TallMatrix heavy_tail_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(d >= 1 && n >= d, Errc::ShapeInvalid, "heavy_tail matrix needs n >= d >= 1");
  Matrix a(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream stream(seed, i);
    const double scale = 1.0 / std::sqrt(-std::log(stream.uniform_positive()));
    for (auto& v : a.row(i)) v = scale * stream.normal();
  }
  return TallMatrix(std::move(a));
}

/// Rows 0..k-1 are e_0..e_{k-1}; the remaining rows are Gaussian on the last
/// d - k coordinates (all zero when k = d). The first k leverage scores are 1.
inline TallMatrix coherent_block_matrix(std::size_t n, std::size_t d, std::size_t k,
                                        std::uint64_t seed) {
  require(d >= 1 && n >= d, Errc::ShapeInvalid, "coherent_block matrix needs n >= d >= 1");
  require(k >= 1 && k <= d, Errc::ShapeInvalid, "coherent_block needs 1 <= k <= d");
  require(k == d || n - k >= d - k, Errc::ShapeInvalid, "coherent_block tail is rank deficient");
  Matrix a(n, d);
  for (std::size_t i = 0; i < k; ++i) a(i, i) = 1.0;
  for (std::size_t i = k; i < n; ++i) {
    RandomStream stream(seed, i);
    for (std::size_t j = k; j < d; ++j) a(i, j) = stream.normal();
  }
  return TallMatrix(std::move(a));
}

inline TallMatrix generate_matrix(MatrixKind kind, std::size_t n, std::size_t d,
                                  std::uint64_t seed, std::size_t block = 0) {
  switch (kind) {
    case MatrixKind::Gaussian: return gaussian_matrix(n, d, seed);
    case MatrixKind::HeavyTail: return heavy_tail_matrix(n, d, seed);
    case MatrixKind::CoherentBlock: return coherent_block_matrix(n, d, block == 0 ? d : block, seed);
    case MatrixKind::Theorem4:
      require(n == 2 * d, Errc::ShapeInvalid, "theorem4 matrix needs n = 2d");
      return lower_bound_matrix(d);
  }
  throw Error(Errc::InvalidArgument, "unknown matrix kind");
}

inline MatrixKind parse_matrix_kind(std::string_view name) {
  if (name == "gaussian") return MatrixKind::Gaussian;
  if (name == "heavy_tail") return MatrixKind::HeavyTail;
  if (name == "coherent_block") return MatrixKind::CoherentBlock;
  if (name == "theorem4") return MatrixKind::Theorem4;
  throw Error(Errc::ParseError, "unknown matrix kind '" + std::string(name) + "'");
}

}  // namespace lessketch

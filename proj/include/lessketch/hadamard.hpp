#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

#include "lessketch/error.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/rng.hpp"

namespace lessketch {

inline bool is_power_of_two(std::size_t n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) noexcept { return std::bit_ceil(n); }

/// In-place orthonormal fast Walsh-Hadamard transform (scaled by 2^{-k/2});
/// self-inverse.
inline void walsh_hadamard(std::span<double> v) {
  const std::size_t len = v.size();
  if (!is_power_of_two(len))
    throw Error(Errc::LengthNotPowerOfTwo, "Walsh-Hadamard length must be a power of two");
  for (std::size_t h = 1; h < len; h *= 2) {
    for (std::size_t i = 0; i < len; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = v[j];
        const double y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(len));
  for (double& x : v) x *= scale;
}

/// Applies the orthonormal transform to every column of `m` at once; the
/// butterflies operate on whole rows so the inner loop is contiguous.
inline void walsh_hadamard_columns(Matrix& m) {
  const std::size_t len = m.rows();
  if (!is_power_of_two(len))
    throw Error(Errc::LengthNotPowerOfTwo, "Walsh-Hadamard length must be a power of two");
  const std::size_t d = m.cols();
  for (std::size_t h = 1; h < len; h *= 2) {
    for (std::size_t i = 0; i < len; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        double* top = &m(j, 0);
        double* bottom = &m(j + h, 0);
        for (std::size_t c = 0; c < d; ++c) {
          const double x = top[c];
          const double y = bottom[c];
          top[c] = x + y;
          bottom[c] = x - y;
        }
      }
    }
  }
  m *= 1.0 / std::sqrt(static_cast<double>(len));
}

/// H diag(eps) A_padded, with A zero-padded to the next power of two rows and
/// eps drawn as uniform signs from `stream`. The result has the same Gram
/// matrix as A.
inline Matrix randomized_hadamard(const Matrix& a, RandomStream& stream) {
  const std::size_t padded = next_power_of_two(a.rows());
  Matrix out(padded, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double s = stream.sign();
    auto src = a.row(i);
    auto dst = out.row(i);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = s * src[c];
  }
  walsh_hadamard_columns(out);
  return out;
}

inline TallMatrix randomized_hadamard_preprocess(const TallMatrix& a, std::uint64_t seed,
                                                 std::uint64_t replica = 0) {
  RandomStream stream(seed, replica);
  return TallMatrix(randomized_hadamard(a.matrix(), stream));
}

}  // namespace lessketch

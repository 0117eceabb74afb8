#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "lessketch/error.hpp"

namespace lessketch {

/// Philox4x32-10 block function (Salmon et al., Random123). Pure integer
/// arithmetic, so identical (counter, key) pairs give identical blocks on
/// every platform.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Deterministic stream keyed by (seed, replica). The seed is the Philox key;
/// the replica index occupies the upper half of the counter and the lower
/// half counts blocks, so streams for distinct pairs never share a block.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t replica) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica) {}

  std::uint64_t next_u64() noexcept {
    if (buffered_ == 0) refill();
    return buffer_[--buffered_];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_positive() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_positive()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// +1 or -1 with equal probability, one bit per call.
  double sign() noexcept {
    if (bits_left_ == 0) {
      bits_ = next_u64();
      bits_left_ = 64;
    }
    const bool negative = (bits_ & 1u) != 0;
    bits_ >>= 1;
    --bits_left_;
    return negative ? -1.0 : 1.0;
  }

  /// Same values as calling sign() out.size() times.
  void fill_signs(std::span<double> out) noexcept {
    std::size_t k = 0;
    while (k < out.size() && bits_left_ > 0) out[k++] = sign();
    double* dst = out.data();
    const std::size_t n = out.size();
    for (; n - k >= 64; k += 64) {
      const std::uint64_t bits = next_u64();
      for (unsigned b = 0; b < 64; ++b)
        dst[k + b] = 1.0 - 2.0 * static_cast<double>((bits >> b) & 1u);
    }
    while (k < out.size()) out[k++] = sign();
  }

  /// Uniform integer in [0, bound) (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  bool bernoulli(double probability) noexcept { return uniform() < probability; }

 private:
  void refill() noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(replica_),
                                  static_cast<std::uint32_t>(replica_ >> 32)};
    const auto out = Philox4x32::block(ctr, key_);
    ++block_;
    // Popped from the back: first draw is (out[0], out[1]).
    buffer_[1] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
    buffer_[0] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
    buffered_ = 2;
  }

  Philox4x32::Key key_;
  std::uint64_t replica_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream rng_stream(std::uint64_t seed, std::uint64_t replica) {
  return RandomStream(seed, replica);
}

/// Walker/Vose alias table over a probability vector. Zero-probability
/// entries are never returned.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> probabilities) {
    const std::size_t n = probabilities.size();
    require(n > 0, Errc::InvalidArgument, "alias table needs at least one outcome");
    double total = 0.0;
    std::size_t heaviest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      require(probabilities[i] >= 0.0 && std::isfinite(probabilities[i]), Errc::InvalidArgument,
              "probabilities must be finite and non-negative");
      total += probabilities[i];
      if (probabilities[i] > probabilities[heaviest]) heaviest = i;
    }
    require(total > 0.0, Errc::InvalidArgument, "probabilities sum to zero");

    threshold_.assign(n, 0.0);
    alias_.assign(n, heaviest);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small;
    std::vector<std::size_t> large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = probabilities[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      threshold_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) threshold_[i] = 1.0;
    for (std::size_t i : small) threshold_[i] = probabilities[i] > 0.0 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (probabilities[alias_[i]] == 0.0) alias_[i] = heaviest;
  }

  std::size_t size() const noexcept { return threshold_.size(); }

  std::size_t sample(RandomStream& stream) const noexcept {
    const std::size_t column = stream.below(threshold_.size());
    return stream.uniform() < threshold_[column] ? column : alias_[column];
  }

 private:
  std::vector<double> threshold_;
  std::vector<std::size_t> alias_;
};

}  // namespace lessketch

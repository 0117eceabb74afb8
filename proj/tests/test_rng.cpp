#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lessketch/rng.hpp"

using namespace lessketch;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::block({0, 0, 0, 0}, {0, 0}),
            (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu}),
            (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u}),
            (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, SamePairSameDraws) {
  RandomStream a = rng_stream(99, 3);
  RandomStream b = rng_stream(99, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, DistinctReplicasDiffer) {
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    RandomStream a = rng_stream(seed, 0);
    RandomStream b = rng_stream(seed, 1);
    EXPECT_NE(a.next_u64(), b.next_u64());
  }
  EXPECT_NE(rng_stream(1, 0).next_u64(), rng_stream(2, 0).next_u64());
}

TEST(RandomStream, UniformMean) {
  RandomStream s = rng_stream(7, 0);
  double total = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    total += u;
  }
  EXPECT_NEAR(total / n, 0.5, 0.002);
}

TEST(RandomStream, NormalMoments) {
  RandomStream s = rng_stream(8, 0);
  const int n = 400000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  // Standard errors: 1/sqrt(n), sqrt(2/n), sqrt(96/n).
  EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RandomStream, FillSignsMatchesSingleDraws) {
  for (std::size_t offset : {0u, 1u, 37u, 64u}) {
    RandomStream a = rng_stream(5, 2);
    RandomStream b = rng_stream(5, 2);
    for (std::size_t i = 0; i < offset; ++i) ASSERT_EQ(a.sign(), b.sign());
    std::vector<double> bulk(300);
    a.fill_signs(bulk);
    for (double v : bulk) ASSERT_EQ(v, b.sign());
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(RandomStream, SignsBalanced) {
  RandomStream s = rng_stream(3, 0);
  double total = 0.0;
  const int n = 1 << 20;
  for (int i = 0; i < n; ++i) total += s.sign();
  EXPECT_LE(std::abs(total), 4.0 * std::sqrt(static_cast<double>(n)));
}

TEST(RandomStream, BelowStaysInRangeAndIsUniform) {
  RandomStream s = rng_stream(4, 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  const double p = 1.0 / 7.0;
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(AliasTable, FrequenciesAndZeroMass) {
  const std::vector<double> p = {0.5, 0.0, 0.2, 0.3, 0.0};
  const AliasTable table(p);
  RandomStream s = rng_stream(10, 0);
  std::vector<int> counts(p.size(), 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[table.sample(s)];
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      EXPECT_EQ(counts[i], 0);
      continue;
    }
    EXPECT_NEAR(counts[i] / static_cast<double>(n), p[i], 4.0 * std::sqrt(p[i] * (1 - p[i]) / n));
  }
}

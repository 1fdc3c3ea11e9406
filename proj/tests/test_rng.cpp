#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/rng.hpp"

using namespace mlab;

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Rng, SameSeedAndStreamReproduce) {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(42, 3), d(42, 3);
  for (int i = 0; i < 101; ++i) ASSERT_EQ(c.normal(), d.normal());
}

TEST(Rng, StreamsAndSeedsDiffer) {
  Rng a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, FirstDrawIsTheFirstBlock) {
  Rng r(0, 0);
  const auto blk = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r.next_u64(), (static_cast<std::uint64_t>(blk[1]) << 32) | blk[0]);
  EXPECT_EQ(r.next_u64(), (static_cast<std::uint64_t>(blk[3]) << 32) | blk[2]);
  const auto blk2 = philox4x32_10({1, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r.next_u64(), (static_cast<std::uint64_t>(blk2[1]) << 32) | blk2[0]);
}

TEST(Rng, UniformMoments) {
  Rng r(7, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 2e-3);
}

TEST(Rng, NormalMoments) {
  Rng r(8, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    ASSERT_TRUE(std::isfinite(x));
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(s4 / n, 3.0, 0.1);
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
  Rng r(9, 0);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++hist[r.uniform_index(7)];
  for (int c : hist) EXPECT_NEAR(c, n / 7.0, 5.0 * std::sqrt(n / 7.0));
  EXPECT_EQ(r.uniform_index(1), 0u);
  EXPECT_THROW(r.uniform_index(0), InvalidArgument);
}

TEST(Rng, CategoricalFrequencies) {
  Rng r(10, 0);
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  std::vector<int> hist(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[r.categorical(p)];
  EXPECT_EQ(hist[1], 0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(hist[i] / double(n), p[i], 0.01);
}

TEST(Rng, CategoricalDegenerate) {
  Rng r(11, 0);
  const std::vector<double> p{0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(r.categorical(p), 1u);
}

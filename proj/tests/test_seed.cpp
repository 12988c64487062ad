#include <gtest/gtest.h>

#include <set>

#include "inclab/seed.hpp"

using namespace inclab;

TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(SeedStream, ChildrenAreDistinctAndStable) {
  const SeedStream root(42);
  std::set<std::uint64_t> keys;
  for (std::uint64_t t = 0; t < 1000; ++t) keys.insert(root.child(t).key());
  EXPECT_EQ(keys.size(), 1000u);
  EXPECT_EQ(root.child(3).child(4).key(), SeedStream(42, {3, 4}).key());
  EXPECT_NE(root.child(3).child(4).key(), root.child(4).child(3).key());
  EXPECT_NE(SeedStream(1).key(), SeedStream(2).key());
}

TEST(RandomEngine, Reproducible) {
  RandomEngine a(SeedStream(9).child(1)), b(SeedStream(9).child(1)), c(SeedStream(9).child(2));
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    differs |= x != z;
  }
  EXPECT_TRUE(differs);
}

TEST(RandomEngine, UniformMoments) {
  RandomEngine rng(SeedStream(5));
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  // 5 standard errors
  EXPECT_NEAR(s / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(s2 / n, 1.0 / 3, 5 * std::sqrt(4.0 / 45 / n));
}

TEST(RandomEngine, NormalMoments) {
  RandomEngine rng(SeedStream(6));
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5 / std::sqrt(double(n)));
  EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}

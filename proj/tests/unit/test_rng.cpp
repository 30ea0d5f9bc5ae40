#include <gtest/gtest.h>

#include "lorentzfk/rng.hpp"
#include "stats.hpp"

using namespace lfk;

TEST(Stream, SameSeedSameSequence) {
  Stream a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Stream, DeriveSeparatesKeysAndIndices) {
  Stream a = Stream::derive(7, "mc-run", 0);
  Stream b = Stream::derive(7, "mc-run", 1);
  Stream c = Stream::derive(7, "geometry", 0);
  Stream d = Stream::derive(7, "mc-run", 0);
  const auto va = a();
  EXPECT_NE(va, b());
  EXPECT_NE(va, c());
  EXPECT_EQ(va, d());
}

TEST(Stream, UniformInUnitInterval) {
  Stream s(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(s.uniform_pos(), 0.0);
  }
}

TEST(Stream, BelowIsUniform) {
  Stream s(3);
  std::vector<double> counts(7, 0.0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) counts[s.below(7)] += 1.0;
  EXPECT_GT(lfk::testing::chi_square_p(counts, std::vector<double>(7, n / 7.0)), 0.001);
}

TEST(Stream, NormalMoments) {
  Stream s(5);
  std::vector<double> xs, sq;
  for (int i = 0; i < 200000; ++i) {
    const double z = s.normal();
    xs.push_back(z);
    sq.push_back(z * z);
  }
  const auto m = lfk::testing::mean_se(xs);
  const auto v = lfk::testing::mean_se(sq);
  EXPECT_LT(std::abs(m.mean), 4 * m.se);
  EXPECT_LT(std::abs(v.mean - 1.0), 4 * v.se);
}

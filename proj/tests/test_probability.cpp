#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "stsum/probability.hpp"

using namespace stsum;

namespace {

Field row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Field(Shape::image(n, 1), std::move(v));
}

}  // namespace

TEST(BuildBinning, FullEightBitRange) {
  const BinningSpec b = build_binning(row({0, 255, 0, 255}), 256);
  EXPECT_EQ(b.lo, 0.0);
  EXPECT_EQ(b.hi, 255.0);
  EXPECT_EQ(b.bin_count, 256u);
  EXPECT_EQ(b.bin_of(0), 0u);
  EXPECT_EQ(b.bin_of(255), 255u);
}

TEST(BuildBinning, ConstantFieldIsDegenerate) {
  const BinningSpec b = build_binning(Field::filled(Shape::image(3, 3), 7.0), 16);
  EXPECT_EQ(b.lo, 7.0);
  EXPECT_EQ(b.hi, 7.0);
  EXPECT_EQ(b.bin_of(7.0), 0u);
  EXPECT_EQ(b.bin_count, 1u);
}

TEST(BuildBinning, EqualWidthHalves) {
  const BinningSpec b = build_binning(row({0, 1, 2, 3}), 2);
  EXPECT_EQ(b.bin_of(0), 0u);
  EXPECT_EQ(b.bin_of(1), 0u);
  EXPECT_EQ(b.bin_of(2), 1u);
  EXPECT_EQ(b.bin_of(3), 1u);
}

TEST(BuildBinning, ZeroBinsRejected) {
  try {
    build_binning(row({0, 1}), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(BuildJoint, IndependentConstruction) {
  const auto j = build_joint(row({0, 0, 1, 1}), row({0, 1, 0, 1}), 2);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) EXPECT_DOUBLE_EQ(j.p(x, y), 0.25);
  EXPECT_DOUBLE_EQ(j.px(0), 0.5);
  EXPECT_DOUBLE_EQ(j.py(1), 0.5);
}

TEST(BuildJoint, IdenticalFields) {
  const auto j = build_joint(row({0, 0, 1, 1}), row({0, 0, 1, 1}), 2);
  EXPECT_DOUBLE_EQ(j.p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(j.p(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(j.p(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(j.p(1, 0), 0.0);
}

TEST(BuildJoint, CountedFixture) {
  // counts over the 4 positions: (0,0) x2, (0,1) x1, (1,1) x1
  const auto j = build_joint(row({0, 0, 0, 1}), row({0, 0, 1, 1}), 2);
  EXPECT_DOUBLE_EQ(j.p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(j.p(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(j.p(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(j.p(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(j.px(0), 0.75);
  EXPECT_DOUBLE_EQ(j.px(1), 0.25);
  EXPECT_DOUBLE_EQ(j.py(0), 0.5);
  EXPECT_DOUBLE_EQ(j.py(1), 0.5);
}

TEST(BuildJoint, ShapeMismatch) {
  try {
    build_joint(row({0, 1}), Field::filled(Shape::image(1, 2), 0), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Conditional, Examples) {
  const auto diag = build_joint(row({0, 0, 1, 1}), row({0, 0, 1, 1}), 2);
  EXPECT_EQ(conditional(diag, 0), (std::vector<double>{1.0, 0.0}));

  const auto indep = build_joint(row({0, 0, 1, 1}), row({0, 1, 0, 1}), 2);
  EXPECT_EQ(conditional(indep, 1), (std::vector<double>{0.5, 0.5}));

  const auto fix = build_joint(row({0, 0, 0, 1}), row({0, 0, 1, 1}), 2);
  EXPECT_EQ(conditional(fix, 1), (std::vector<double>{0.5, 0.5}));
}

TEST(Conditional, UnobservedBin) {
  const auto j = build_joint(row({0, 0, 1, 1}), row({0, 0, 0, 1}), 4);
  // y has 4 bins over [0,1]; bins 1 and 2 are empty
  try {
    conditional(j, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_conditional);
  }
}

class JointProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{2024};

  std::pair<Field, Field> random_pair(std::size_t n, int levels) {
    std::uniform_int_distribution<int> v(0, levels - 1);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = v(rng);
      b[i] = (v(rng) + a[i]) / 2.0;
    }
    return {row(a), row(b)};
  }
};

TEST_F(JointProperties, NormalizedWithConsistentMarginals) {
  for (int t = 0; t < 100; ++t) {
    auto [a, b] = random_pair(50 + t, 6);
    const auto j = build_joint(a, b, 1 + t % 8);
    double total = 0.0;
    for (double v : j.table()) {
      ASSERT_GE(v, 0.0);
      total += v;
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
    for (std::size_t x = 0; x < j.bins_x(); ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < j.bins_y(); ++y) s += j.p(x, y);
      ASSERT_EQ(s, j.px(x));
    }
    for (std::size_t y = 0; y < j.bins_y(); ++y) {
      double s = 0.0;
      for (std::size_t x = 0; x < j.bins_x(); ++x) s += j.p(x, y);
      ASSERT_EQ(s, j.py(y));
    }
    for (std::size_t y = 0; y < j.bins_y(); ++y) {
      if (j.py(y) == 0) continue;
      const auto c = conditional(j, y);
      ASSERT_NEAR(std::accumulate(c.begin(), c.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST_F(JointProperties, JointPermutationInvariance) {
  for (int t = 0; t < 50; ++t) {
    auto [a, b] = random_pair(64, 5);
    std::vector<std::size_t> perm(64);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pa(64), pb(64);
    for (std::size_t i = 0; i < 64; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    const auto j1 = build_joint(a, b, 5);
    const auto j2 = build_joint(row(pa), row(pb), 5);
    ASSERT_TRUE(std::equal(j1.table().begin(), j1.table().end(), j2.table().begin()));
  }
}

TEST_F(JointProperties, SwapTransposes) {
  for (int t = 0; t < 50; ++t) {
    auto [a, b] = random_pair(40, 7);
    const auto jab = build_joint(a, b, 6);
    const auto jba = build_joint(b, a, 6);
    ASSERT_EQ(jab.bins_x(), jba.bins_y());
    for (std::size_t x = 0; x < jab.bins_x(); ++x)
      for (std::size_t y = 0; y < jab.bins_y(); ++y) ASSERT_EQ(jab.p(x, y), jba.p(y, x));
    const auto tr = jab.transposed();
    ASSERT_TRUE(std::equal(tr.table().begin(), tr.table().end(), jba.table().begin()));
  }
}

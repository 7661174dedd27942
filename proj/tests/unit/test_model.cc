#include <gtest/gtest.h>

#include <cstdint>
#include <random>

#include "f3a/model.h"
#include "f3a/rng.h"

namespace f3a {
namespace {

// Independent SplitMix64 written from the published reference algorithm.
uint64_t reference_splitmix(uint64_t& x) {
  uint64_t z = (x += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

TEST(BudgetTest, Examples) {
  EXPECT_EQ(make_budget(1.0, 576).k, 576);
  EXPECT_EQ(make_budget(0.2, 576).k, 115);
  EXPECT_EQ(make_budget(0.5, 9).k, 5);
}

TEST(BudgetTest, RejectsBadInputs) {
  EXPECT_THROW(make_budget(0.0, 10), std::invalid_argument);
  EXPECT_THROW(make_budget(1.5, 10), std::invalid_argument);
  EXPECT_THROW(make_budget(-0.1, 10), std::invalid_argument);
  EXPECT_THROW(make_budget(0.5, 0), std::invalid_argument);
}

TEST(BudgetTest, AlwaysWithinOneAndN) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ratio(1e-9, 1.0);
  std::uniform_int_distribution<int> count(1, 5000);
  for (int t = 0; t < 5000; ++t) {
    const double r = ratio(gen);
    const int n = count(gen);
    const int k = make_budget(r, n).k;
    ASSERT_GE(k, 1);
    ASSERT_LE(k, n);
  }
}

TEST(BudgetTest, RoundHalfUp) {
  EXPECT_EQ(round_half_up(4.5), 5);
  EXPECT_EQ(round_half_up(4.49), 4);
  EXPECT_EQ(round_half_up(0.0), 0);
}

TEST(TokenGridTest, CoordinatesAreRowMajor) {
  TokenGrid g(4, 4, 1, std::vector<double>(16, 1.0));
  EXPECT_EQ(g.coord(0), (GridCoord{0, 0}));
  EXPECT_EQ(g.coord(5), (GridCoord{1, 1}));
  EXPECT_EQ(g.coord(15), (GridCoord{3, 3}));
  EXPECT_THROW(g.coord(16), std::invalid_argument);
  EXPECT_THROW(g.coord(-1), std::invalid_argument);
}

TEST(TokenGridTest, CoordinateRoundTrip) {
  std::mt19937 gen(11);
  for (int t = 0; t < 50; ++t) {
    const int rows = 1 + gen() % 20, cols = 1 + gen() % 20;
    TokenGrid g(rows, cols, 2, std::vector<double>(rows * cols * 2, 0.5));
    for (Index i = 0; i < g.size(); ++i) ASSERT_EQ(g.index(g.coord(i)), i);
  }
}

TEST(TokenGridTest, RejectsBadShapes) {
  EXPECT_THROW(TokenGrid(2, 2, 3, std::vector<double>(11, 0.0)), std::invalid_argument);
  EXPECT_THROW(TokenGrid(0, 2, 3, {}), std::invalid_argument);
  std::vector<double> v(4, 0.0);
  v[2] = std::nan("");
  EXPECT_THROW(TokenGrid(2, 2, 1, v), std::invalid_argument);
}

TEST(HyperParamsTest, DefaultsMatchReferenceTable) {
  HyperParams hp;
  EXPECT_EQ(hp.heads, 16);
  EXPECT_EQ(hp.sensing_dim, 128);
  EXPECT_EQ(hp.nnz_visual, 32);
  EXPECT_EQ(hp.nnz_text, 8);
  EXPECT_EQ(hp.mask_ones, 16);
  EXPECT_EQ(hp.active_heads, 4);
  EXPECT_DOUBLE_EQ(hp.gate_temperature, 0.5);
  EXPECT_EQ(hp.seed, 42u);
  EXPECT_EQ(hp.window, 2);
  EXPECT_EQ(hp.scaffold_per_window, 1);
  EXPECT_EQ(hp.lock_radius, 1);
  EXPECT_DOUBLE_EQ(hp.spatial_bandwidth, 2.0);
  EXPECT_DOUBLE_EQ(hp.local_weight, 0.35);
  EXPECT_DOUBLE_EQ(hp.redundancy_weight, 0.35);
  EXPECT_DOUBLE_EQ(hp.jump_fraction, 0.15);
  EXPECT_DOUBLE_EQ(hp.coverage_balance, 0.5);
  EXPECT_DOUBLE_EQ(hp.uncertainty_weight, 0.25);
  EXPECT_DOUBLE_EQ(hp.coverage_penalty, 0.50);
  EXPECT_NO_THROW(hp.validate());
}

TEST(HyperParamsTest, ValidateRejectsOutOfRange) {
  HyperParams hp;
  hp.active_heads = 17;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = HyperParams{};
  hp.jump_fraction = 1.0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = HyperParams{};
  hp.mask_ones = 129;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
}

TEST(RngTest, ReferenceVectors) {
  Rng rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ull);
}

TEST(RngTest, MatchesIndependentImplementation) {
  for (uint64_t seed : {0ull, 1ull, 42ull, 0xFFFFFFFFFFFFFFFFull}) {
    Rng rng(seed);
    uint64_t x = seed;
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(rng.next(), reference_splitmix(x));
  }
}

TEST(RngTest, EqualSeedsGiveEqualStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next(), b.next());
    ASSERT_EQ(a.gaussian(), b.gaussian());
  }
}

TEST(RngTest, UniformAndGaussianMoments) {
  Rng rng(9);
  double su = 0, sg = 0, sg2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    su += rng.uniform01();
    const double g = rng.gaussian();
    sg += g;
    sg2 += g * g;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sg / n, 0.0, 0.01);
  EXPECT_NEAR(sg2 / n, 1.0, 0.02);
}

TEST(RngTest, Fnv1aReference) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

}  // namespace
}  // namespace f3a

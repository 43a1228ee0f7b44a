#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qoscache/bounds.hpp"

using namespace qoscache;

namespace {

std::vector<double> one_to(int n) {
  std::vector<double> r;
  for (int k = 1; k <= n; ++k) r.push_back(k);
  return r;
}

}  // namespace

TEST(CutSet, MatchesSubsetEnumeration) {
  oracle::ScenarioGen gen(11);
  for (int rep = 0; rep < 400; ++rep) {
    const auto s = gen.scenario(7, 7);
    EXPECT_NEAR(cutset_bound(s), oracle::cutset(s), 1e-12);
  }
}

TEST(CutSet, Examples) {
  EXPECT_DOUBLE_EQ(cutset_bound(make_scenario(10, 10, one_to(10), std::vector<double>(10, 0.0))), 55.0);
  EXPECT_DOUBLE_EQ(cutset_bound(make_scenario(2, 2, {1, 2}, {1, 1})), 1.5);
  EXPECT_DOUBLE_EQ(cutset_bound(make_scenario(2, 2, {1, 2}, {0, 0})), 3.0);
}

TEST(TwoUserBound, Examples) {
  EXPECT_DOUBLE_EQ(two_user_bound(make_scenario(2, 2, {1, 2}, {1, 1})), 1.5);
  EXPECT_DOUBLE_EQ(two_user_bound(make_scenario(2, 2, {1, 2}, {0, 0})), 2.5);
  EXPECT_DOUBLE_EQ(two_user_bound(make_scenario(4, 2, {1, 2}, {2, 2})), 1.5);
  EXPECT_THROW(two_user_bound(make_scenario(2, 3, {1, 2, 3}, {0, 0, 0})), Error);
  EXPECT_THROW(two_user_bound(make_scenario(1, 2, {1, 2}, {0, 0})), Error);
}

TEST(LowerBound2x2, Examples) {
  EXPECT_DOUBLE_EQ(lower_bound_2x2(make_scenario(2, 2, {1, 2}, {0, 0})), 3.0);
  EXPECT_DOUBLE_EQ(lower_bound_2x2(make_scenario(2, 2, {1, 2}, {1, 1})), 1.5);
  EXPECT_DOUBLE_EQ(lower_bound_2x2(make_scenario(2, 2, {1, 2}, {3, 5})), 0.0);
  EXPECT_THROW(lower_bound_2x2(make_scenario(3, 2, {1, 2}, {0, 0})), Error);
}

TEST(LowerBound2User, Examples) {
  EXPECT_DOUBLE_EQ(lower_bound_2user_nfile(make_scenario(3, 2, {1, 2}, {1.5, 1.5})), 1.5);
  EXPECT_DOUBLE_EQ(lower_bound_2user_nfile(make_scenario(3, 2, {1, 2}, {0, 0})), 3.0);
  EXPECT_DOUBLE_EQ(lower_bound_2user_nfile(make_scenario(6, 2, {1, 2}, {6, 12})), 0.0);
  try {
    lower_bound_2user_nfile(make_scenario(1, 2, {1, 2}, {0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NeedAtLeastTwoFiles);
  }
}

TEST(BestLowerBound, Examples) {
  EXPECT_DOUBLE_EQ(best_lower_bound(make_scenario(2, 2, {1, 2}, {1, 1})), 1.5);
  EXPECT_DOUBLE_EQ(best_lower_bound(make_scenario(10, 10, one_to(10), std::vector<double>(10, 0.0))), 55.0);
  EXPECT_DOUBLE_EQ(best_lower_bound(make_scenario(3, 2, {1, 2}, {1.5, 1.5})), 1.5);
}

TEST(BestLowerBound, DominatesEachComponent) {
  oracle::ScenarioGen gen(12);
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = gen.scenario(5, 3);
    const double b = best_lower_bound(s);
    EXPECT_GE(b, cutset_bound(s));
    EXPECT_GE(b, 0.0);
    if (s.K() == 2 && s.N() >= 2) {
      EXPECT_GE(b, lower_bound_2user_nfile(s));
    }
  }
}

TEST(BestLowerBound, NonIncreasingInCache) {
  oracle::ScenarioGen gen(13);
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = gen.scenario(5, 4);
    auto M = s.cache_sizes;
    const int k = gen.integer(0, s.K() - 1);
    M[static_cast<std::size_t>(k)] = M[static_cast<std::size_t>(k)] * 1.1 + 0.01;
    EXPECT_LE(best_lower_bound(with_caches(s, M)), best_lower_bound(s) + 1e-12);
  }
}

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qoscache/bounds.hpp"
#include "qoscache/centralized_small.hpp"

using namespace qoscache;

namespace {

// Bits broadcast for a distinct-file demand, summed from the placement's segment sizes.
double delivered_2x2(const PlacementSpec& p, CaseId2x2 c) {
  auto a = [&](int j) { return p.size(std::to_string(j)); };
  switch (c) {
    case CaseId2x2::CaseI: return a(1) + a(2) + 2 * a(6) + a(8);
    case CaseId2x2::CaseII: return a(1) + a(2) + std::max(a(3), a(4)) + a(8);
    case CaseId2x2::CaseIII: return a(1) + std::max(a(3), a(4)) + a(8);
    case CaseId2x2::CaseIV: return a(2) + std::max(a(3), a(4));
    case CaseId2x2::CaseV: return 0.0;
  }
  return -1.0;
}

}  // namespace

TEST(Classify2x2, Examples) {
  EXPECT_EQ(classify_2x2(0.2, 0.3, 1, 2), CaseId2x2::CaseI);
  EXPECT_EQ(classify_2x2(1, 1, 1, 2), CaseId2x2::CaseII);
  EXPECT_EQ(classify_2x2(3, 5, 1, 2), CaseId2x2::CaseV);
  EXPECT_EQ(classify_2x2(1.5, 2, 1, 2), CaseId2x2::CaseIII);
  EXPECT_EQ(classify_2x2(0.5, 3.5, 1, 2), CaseId2x2::CaseIV);
}

TEST(Classify2x2, ConditionsCoverTheQuadrant) {
  // Each grid point must satisfy at least one of the five case condition sets.
  for (double r1 : {0.5, 1.0, 2.0})
    for (double r2 : {r1, r1 + 0.5, 3 * r1})
      for (int a = 0; a <= 120; ++a)
        for (int b = 0; b <= 120; ++b) {
          const double M1 = 3 * r1 * a / 120, M2 = 3 * r2 * b / 120;
          const bool c1 = M1 + M2 <= r1;
          const bool c2 = M1 <= r1 && M2 <= 2 * r2 - r1;
          const bool c3 = M1 > r1 && M2 <= 2 * r2 && M2 - M1 <= 2 * r2 - 2 * r1;
          const bool c4 = M1 <= 2 * r1 && M2 > 2 * r2 - r1 && M2 - M1 > 2 * r2 - 2 * r1;
          const bool c5 = M1 > 2 * r1 && M2 > 2 * r2;
          EXPECT_TRUE(c1 || c2 || c3 || c4 || c5) << M1 << " " << M2 << " " << r1 << " " << r2;
        }
}

TEST(Placement2x2, TableRows) {
  const auto p1 = placement_2x2(make_scenario(2, 2, {1, 2}, {0.2, 0.3}));
  EXPECT_DOUBLE_EQ(p1.size("1"), 0.2);
  EXPECT_DOUBLE_EQ(p1.size("2"), 0.3);
  EXPECT_DOUBLE_EQ(p1.size("6"), 0.5);
  EXPECT_DOUBLE_EQ(p1.size("8"), 1.0);
  for (const char* z : {"3", "4", "5", "7"}) EXPECT_DOUBLE_EQ(p1.size(z), 0.0);

  const auto p5 = placement_2x2(make_scenario(2, 2, {1, 2}, {3, 5}));
  EXPECT_DOUBLE_EQ(p5.size("5"), 1.0);
  EXPECT_DOUBLE_EQ(p5.size("7"), 1.0);
  for (const char* z : {"1", "2", "3", "4", "6", "8"}) EXPECT_DOUBLE_EQ(p5.size(z), 0.0);

  const auto [l1, l2, l3] = case_iii_params(1.5, 2, 1, 2);
  EXPECT_DOUBLE_EQ(l1, 0.0);
  EXPECT_DOUBLE_EQ(l2, 0.0);
  EXPECT_DOUBLE_EQ(l3, 1.0);
  const auto p3 = placement_2x2(make_scenario(2, 2, {1, 2}, {1.5, 2}));
  EXPECT_DOUBLE_EQ(p3.size("1"), 1.0);
  EXPECT_DOUBLE_EQ(p3.size("7"), 1.0);
  for (const char* z : {"2", "3", "4", "5", "6", "8"}) EXPECT_DOUBLE_EQ(p3.size(z), 0.0);
}

TEST(Rate2x2, Examples) {
  EXPECT_DOUBLE_EQ(rate_2x2(make_scenario(2, 2, {1, 2}, {1, 1})), 1.5);
  EXPECT_DOUBLE_EQ(rate_2x2(make_scenario(2, 2, {1, 2}, {0, 0})), 3.0);
  EXPECT_DOUBLE_EQ(rate_2x2(make_scenario(2, 2, {1, 2}, {3, 5})), 0.0);
  EXPECT_THROW(rate_2x2(make_scenario(3, 2, {1, 2}, {0, 0})), Error);
}

TEST(Rate2x2, EqualsPlacementDeliveryAndBound) {
  oracle::ScenarioGen gen(21);
  for (int rep = 0; rep < 2000; ++rep) {
    const double r1 = gen.uniform(0.1, 2.0), r2 = r1 + gen.uniform(0.0, 2.0);
    const double M1 = gen.uniform(0.0, 2.5 * r1), M2 = gen.uniform(0.0, 2.5 * r2);
    const auto s = make_scenario(2, 2, {r1, r2}, {M1, M2});
    const auto p = placement_2x2(s);  // throws if the placement breaks a budget or partition
    const double rate = rate_2x2(s);
    EXPECT_NEAR(delivered_2x2(p, classify_2x2(M1, M2, r1, r2)), rate, 1e-12);
    EXPECT_NEAR(rate, lower_bound_2x2(s), 1e-12);
  }
}

TEST(Region2User, ExamplesAndPlacement) {
  const auto a = make_scenario(3, 2, {1, 2}, {1.5, 1.5});
  EXPECT_EQ(region_2user_nfile(a), Region2User::M1);
  EXPECT_DOUBLE_EQ(rate_2user_nfile(a), 1.5);
  const auto pa = placement_2user_nfile(a);
  EXPECT_DOUBLE_EQ(pa.size("1"), 0.5);
  EXPECT_DOUBLE_EQ(pa.size("3"), 0.5);
  EXPECT_DOUBLE_EQ(pa.size("4"), 0.0);
  EXPECT_DOUBLE_EQ(pa.size("6"), 1.0);

  const auto z = make_scenario(3, 2, {1, 2}, {0, 0});
  EXPECT_DOUBLE_EQ(rate_2user_nfile(z), 3.0);
  const auto pz = placement_2user_nfile(z);
  EXPECT_DOUBLE_EQ(pz.size("4"), 1.0);
  EXPECT_DOUBLE_EQ(pz.size("6"), 1.0);

  const auto f = make_scenario(3, 2, {1, 2}, {4, 7});
  EXPECT_EQ(region_2user_nfile(f), Region2User::M5);
  EXPECT_DOUBLE_EQ(rate_2user_nfile(f), 0.0);
  const auto pf = placement_2user_nfile(f);
  EXPECT_DOUBLE_EQ(pf.size("2"), 1.0);
  EXPECT_DOUBLE_EQ(pf.size("5"), 1.0);
}

TEST(Rate2User, MatchesPlacementWhenCachesFitTheirDescriptions) {
  oracle::ScenarioGen gen(22);
  for (int rep = 0; rep < 2000; ++rep) {
    const int N = gen.integer(2, 9);
    const double r1 = gen.uniform(0.1, 2.0), r2 = r1 + gen.uniform(0.0, 2.0);
    const double M1 = gen.uniform(0.0, N * r1 * 1.2), M2 = gen.uniform(0.0, N * r2);
    const auto s = make_scenario(N, 2, {r1, r2}, {M1, M2});
    const double rate = rate_2user_nfile(s);
    EXPECT_NEAR(delivery_rate_2user_nfile(placement_2user_nfile(s)), rate, 1e-12);
    EXPECT_GE(rate, lower_bound_2user_nfile(s) - 1e-12);
  }
}

TEST(Rate2User, OversizedSecondCacheIsRejectedByPlacement) {
  const auto s = make_scenario(3, 2, {1, 2}, {1, 9});
  try {
    placement_2user_nfile(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidPlacement);
  }
  EXPECT_EQ(region_2user_nfile(s), Region2User::M3);
  EXPECT_DOUBLE_EQ(rate_2user_nfile(s), 1 - 1.0 / 3);
}

TEST(Rate2User, EqualCachesMeetTheBound) {
  for (int N : {3, 6, 9})
    for (int j = 0; j < 50; ++j) {
      const double M = N * 2.0 * j / 49;
      const auto s = make_scenario(N, 2, {1, 2}, {M, M});
      EXPECT_NEAR(rate_2user_nfile(s), lower_bound_2user_nfile(s), 1e-12) << N << " " << M;
    }
}

TEST(Gap2User, Examples) {
  EXPECT_DOUBLE_EQ(gap_2user_nfile(make_scenario(3, 2, {1, 2}, {1.5, 1.5})), 0.0);
  EXPECT_DOUBLE_EQ(gap_2user_nfile(make_scenario(4, 2, {1, 2}, {1, 1})), 0.25);
  EXPECT_NEAR(gap_2user_nfile(make_scenario(3, 2, {1, 2}, {1, 0.5})), 0.5 / 6, 1e-15);
}

TEST(Gap2User, Errors) {
  auto code = [](const Scenario& s) {
    try {
      gap_2user_nfile(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  EXPECT_EQ(code(make_scenario(3, 2, {1, 2}, {4, 7})), ErrorCode::OutOfRegion);
  EXPECT_EQ(code(make_scenario(3, 2, {1, 2}, {1, 1}, false)), ErrorCode::NotRefinable);
  EXPECT_EQ(code(make_scenario(3, 3, {1, 2, 3}, {1, 1, 1})), ErrorCode::WrongShape);
}

TEST(Gap2User, DivisibleByThreeMatchesRateMinusBoundWhenFourthTermBinds) {
  // N = 3: on equal caches inside M1 the gap is zero and the fourth bound term binds.
  for (int j = 0; j <= 20; ++j) {
    const double M = 1.5 * j / 20;
    const auto s = make_scenario(3, 2, {1, 2}, {M, M});
    EXPECT_NEAR(gap_2user_nfile(s), rate_2user_nfile(s) - lower_bound_2user_nfile(s), 1e-12);
  }
}

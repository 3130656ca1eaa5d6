#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "malts/errors.hpp"
#include "malts/matching.hpp"

using namespace malts;
using malts::testing::cont_unit;

namespace {

std::vector<Unit> pool_1d(const std::vector<double>& xs, Arm arm = Arm::kControl, const std::string& prefix = "p") {
  std::vector<Unit> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(cont_unit(prefix + std::to_string(i), {xs[i]}, 0, arm));
  return out;
}

MatchedGroup group_with_diameter(double d) {
  MatchedGroup g;
  g.diameter = d;
  return g;
}

}  // namespace

TEST(Knn, Example) {
  const auto pool = pool_1d({0, 1, 2, 5});
  const auto r = knn(StretchMetric({1.0}, {}), cont_unit("q", {0.9}, 0, Arm::kControl), pool, 2, 0);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].id, "p1");
  EXPECT_NEAR(r[0].distance, 0.1, 1e-15);
  EXPECT_EQ(r[1].id, "p0");
  EXPECT_NEAR(r[1].distance, 0.9, 1e-15);
}

TEST(Knn, WholePoolWhenKIsLarge) {
  const auto pool = pool_1d({5, 0, 2});
  const auto r = knn(StretchMetric({1.0}, {}), cont_unit("q", {0}, 0, Arm::kControl), pool, 10, 0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].id, "p1");
  EXPECT_EQ(r[1].id, "p2");
  EXPECT_EQ(r[2].id, "p0");
}

TEST(Knn, TiesAreSeededAndDeterministic) {
  const auto pool = pool_1d({1, -1, 1, -1});
  const StretchMetric m({1.0}, {});
  const Unit q = cont_unit("q", {0}, 0, Arm::kControl);
  EXPECT_EQ(knn(m, q, pool, 2, 5), knn(m, q, pool, 2, 5));
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 64; ++s)
    for (const auto& n : knn(m, q, pool, 2, s)) seen.insert(n.id);
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Knn, Errors) {
  const StretchMetric m({1.0}, {});
  EXPECT_THROW(knn(m, cont_unit("q", {0}, 0, Arm::kControl), std::vector<Unit>{}, 1, 0), InfeasibleError);
  EXPECT_THROW(knn(m, cont_unit("q", {0}, 0, Arm::kControl), pool_1d({1}), 0, 0), ConfigError);
}

TEST(KnnProperty, MatchesSortOracleAndIsMonotone) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> grid(0, 6);  // coarse grid forces ties
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rep % 50;
    std::vector<Unit> pool;
    for (std::size_t i = 0; i < n; ++i)
      pool.push_back(cont_unit(std::to_string(i), {double(grid(rng)), double(grid(rng))}, 0, Arm::kControl));
    const StretchMetric m({1.0, 0.5}, {});
    const Unit q = cont_unit("q", {double(grid(rng)), double(grid(rng))}, 0, Arm::kControl);
    std::vector<double> all;
    for (const auto& u : pool) all.push_back(distance(m, q, u));
    std::sort(all.begin(), all.end());
    double prev_kth = -1.0;
    for (std::size_t k = 1; k <= n + 2; ++k) {
      const auto r = knn(m, q, pool, k, rng());
      const std::size_t kk = std::min(k, n);
      ASSERT_EQ(r.size(), kk);
      std::set<std::size_t> idx;
      for (std::size_t j = 0; j < kk; ++j) {
        EXPECT_NEAR(r[j].distance, all[j], 1e-12);
        idx.insert(r[j].index);
      }
      EXPECT_EQ(idx.size(), kk);
      EXPECT_GE(r.back().distance, prev_kth);
      prev_kth = r.back().distance;
    }
  }
}

TEST(MatchedGroup, SmallArmsReturnEverything) {
  const auto schema = malts::testing::cont_schema(1);
  const Dataset est(schema, {cont_unit("c0", {0}, 0, Arm::kControl), cont_unit("c1", {1}, 0, Arm::kControl),
                             cont_unit("t0", {2}, 0, Arm::kTreated), cont_unit("t1", {3}, 0, Arm::kTreated)});
  const auto g = matched_group(StretchMetric({1.0}, {}), cont_unit("q", {0}, 0, Arm::kTreated), est, 5, 0);
  EXPECT_EQ(g.control_members.size(), 2u);
  EXPECT_EQ(g.treated_members.size(), 2u);
  EXPECT_DOUBLE_EQ(g.diameter, 3.0);
}

TEST(MatchedGroup, IdenticalControlComesFirst) {
  const auto schema = malts::testing::cont_schema(1);
  const Dataset est(schema, {cont_unit("c0", {4}, 0, Arm::kControl), cont_unit("c1", {1.5}, 0, Arm::kControl),
                             cont_unit("t0", {2}, 0, Arm::kTreated)});
  const auto g = matched_group(StretchMetric({1.0}, {}), cont_unit("q", {1.5}, 0, Arm::kTreated), est, 1, 0);
  EXPECT_EQ(g.control_members[0].id, "c1");
  EXPECT_EQ(g.control_members[0].distance, 0.0);
}

TEST(MatchedGroup, OneDimensionalOrdering) {
  std::vector<Unit> units = pool_1d({0, 1, 2, 5}, Arm::kControl, "c");
  units.push_back(cont_unit("t0", {3}, 0, Arm::kTreated));
  units.push_back(cont_unit("t1", {0.8}, 0, Arm::kTreated));
  const Dataset est(malts::testing::cont_schema(1), units);
  const auto g = matched_group(StretchMetric({1.0}, {}), cont_unit("q", {0.9}, 0, Arm::kControl), est, 2, 0);
  EXPECT_EQ(g.control_members[0].id, "c1");
  EXPECT_EQ(g.control_members[1].id, "c0");
  EXPECT_EQ(g.treated_members[0].id, "t1");
  EXPECT_EQ(g.treated_members[1].id, "t0");
  EXPECT_NEAR(g.diameter, 2.1, 1e-12);
}

TEST(MatchedGroup, QueryExcludedAndEmptyArmNamed) {
  const Dataset est(malts::testing::cont_schema(1),
                    {cont_unit("c0", {0}, 0, Arm::kControl), cont_unit("t0", {1}, 0, Arm::kTreated)});
  try {
    matched_group(StretchMetric({1.0}, {}), est[0], est, 3, 0);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("control"), std::string::npos);
  }
}

TEST(MatchedGroup, ScaleInvariantMemberSets) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<Unit> units;
  for (int i = 0; i < 60; ++i)
    units.push_back(cont_unit(std::to_string(i), {z(rng), z(rng)}, 0, i % 3 ? Arm::kControl : Arm::kTreated));
  const Dataset est(malts::testing::cont_schema(2), units);
  const StretchMetric m({0.3, 2.0}, {});
  for (const auto& q : est.units()) {
    const auto a = matched_group(m, q, est, 4, 1);
    const auto b = matched_group(m.scaled(7.5), q, est, 4, 1);
    for (Arm arm : {Arm::kControl, Arm::kTreated}) {
      std::set<std::string> sa, sb;
      for (const auto& n : a.members(arm)) sa.insert(n.id);
      for (const auto& n : b.members(arm)) sb.insert(n.id);
      EXPECT_EQ(sa, sb);
    }
  }
}

TEST(Prune, Examples) {
  const std::vector<MatchedGroup> gs{group_with_diameter(1), group_with_diameter(2), group_with_diameter(10)};
  const auto r = prune(gs, 5.0);
  ASSERT_EQ(r.kept.size(), 2u);
  ASSERT_EQ(r.pruned.size(), 1u);
  EXPECT_EQ(r.pruned[0].diameter, 10.0);
  EXPECT_EQ(prune(gs, 1e300).kept.size(), 3u);
  EXPECT_THROW(prune(gs, 0.0), ConfigError);
}

TEST(SuggestThreshold, Examples) {
  EXPECT_DOUBLE_EQ(suggest_threshold(std::vector<double>{1, 1, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(suggest_threshold(std::vector<double>{1, 2, 3, 4}), 5.5);
  EXPECT_THROW(suggest_threshold(std::vector<double>{1, 2, 3}), ConfigError);
}

TEST(SuggestThreshold, BimodalSampleSplitsModes) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<MatchedGroup> gs;
  std::vector<double> ds;
  for (int i = 0; i < 50; ++i) gs.push_back(group_with_diameter(1.0 + jitter(rng)));
  for (int i = 0; i < 5; ++i) gs.push_back(group_with_diameter(20.0 + jitter(rng)));
  for (const auto& g : gs) ds.push_back(g.diameter);
  const double th = suggest_threshold(ds);
  EXPECT_GT(th, 1.1);
  EXPECT_LT(th, 19.9);
  const auto r = prune(gs, th);
  EXPECT_EQ(r.kept.size(), 50u);
  EXPECT_EQ(r.pruned.size(), 5u);
  for (const auto& g : r.kept) EXPECT_LE(g.diameter, th);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "malts/errors.hpp"
#include "malts/estimation.hpp"

using namespace malts;
using malts::testing::cont_unit;

namespace {

std::vector<MemberRef> refs(const std::vector<Unit>& units, const std::vector<double>& d = {}) {
  std::vector<MemberRef> out;
  for (std::size_t i = 0; i < units.size(); ++i) out.push_back({&units[i], d.empty() ? 0.0 : d[i]});
  return out;
}

Dataset noisy_data(std::size_t n, std::uint64_t seed, bool y_is_t = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<Unit> units;
  for (std::size_t i = 0; i < n; ++i) {
    const Arm t = i % 2 ? Arm::kTreated : Arm::kControl;
    const double a = z(rng), b = z(rng);
    const double y = y_is_t ? static_cast<double>(t) : a + 2 * b + static_cast<double>(t) + 0.1 * z(rng);
    units.push_back(cont_unit("u" + std::to_string(i), {a, b}, y, t));
  }
  return Dataset(malts::testing::cont_schema(2), std::move(units));
}

MatchedGroup group_from(const Dataset& est) {
  MatchedGroup g;
  for (std::size_t i = 0; i < est.size(); ++i)
    (est[i].treated() ? g.treated_members : g.control_members).push_back({i, est[i].id, 0.0});
  return g;
}

}  // namespace

TEST(Phi, Examples) {
  const Unit target = cont_unit("q", {7}, 0, Arm::kControl);
  const std::vector<Unit> two{cont_unit("a", {0}, 2, Arm::kControl), cont_unit("b", {0}, 4, Arm::kControl)};
  EXPECT_DOUBLE_EQ(phi(EstimatorKind::kMean, refs(two), target), 3.0);

  const std::vector<Unit> sw{cont_unit("a", {0}, 0, Arm::kControl), cont_unit("b", {0}, 10, Arm::kControl)};
  EXPECT_NEAR(phi(EstimatorKind::kSoftmaxWeightedMean, refs(sw, {0.0, std::log(9.0)}), target), 1.0, 1e-14);

  const std::vector<Unit> line{cont_unit("a", {1}, 2, Arm::kControl), cont_unit("b", {2}, 4, Arm::kControl),
                               cont_unit("c", {4}, 8, Arm::kControl)};
  EXPECT_NEAR(phi(EstimatorKind::kLinearRegression, refs(line), target), 14.0, 1e-10);
  EXPECT_THROW(phi(EstimatorKind::kMean, std::vector<MemberRef>{}, target), InfeasibleError);
}

TEST(Phi, RegressionFallsBackOnRankDeficiency) {
  const Unit target = cont_unit("q", {7}, 0, Arm::kControl);
  const std::vector<Unit> same_x{cont_unit("a", {1}, 2, Arm::kControl), cont_unit("b", {1}, 4, Arm::kControl),
                                 cont_unit("c", {1}, 9, Arm::kControl)};
  EXPECT_DOUBLE_EQ(phi(EstimatorKind::kLinearRegression, refs(same_x), target), 5.0);
  const std::vector<Unit> too_few{cont_unit("a", {1}, 2, Arm::kControl), cont_unit("b", {2}, 4, Arm::kControl)};
  EXPECT_THROW(phi(EstimatorKind::kLinearRegression, refs(too_few), target), ConfigError);
}

TEST(Cate, Examples) {
  const auto schema = malts::testing::cont_schema(1);
  const Dataset est(schema, {cont_unit("t0", {0}, 10, Arm::kTreated), cont_unit("t1", {0}, 12, Arm::kTreated),
                             cont_unit("c0", {0}, 2, Arm::kControl), cont_unit("c1", {0}, 4, Arm::kControl)});
  const MatchedGroup g = group_from(est);
  EXPECT_DOUBLE_EQ(cate_for_unit(cont_unit("q", {0}, 0, Arm::kTreated), g, est, EstimatorKind::kMean), 8.0);
  EXPECT_DOUBLE_EQ(cate_for_unit(cont_unit("q", {0}, 10, Arm::kTreated), g, est, EstimatorKind::kMean,
                                 CateMode::kOwnOutcome),
                   7.0);

  const Dataset est2(schema, {cont_unit("t0", {0}, 4, Arm::kTreated), cont_unit("t1", {0}, 6, Arm::kTreated),
                              cont_unit("c0", {0}, 1, Arm::kControl)});
  EXPECT_DOUBLE_EQ(cate_for_unit(cont_unit("q", {0}, 5, Arm::kControl), group_from(est2), est2,
                                 EstimatorKind::kMean, CateMode::kOwnOutcome),
                   0.0);

  MatchedGroup missing = g;
  missing.treated_members.clear();
  EXPECT_THROW(cate_for_unit(est[0], missing, est, EstimatorKind::kMean), InfeasibleError);
}

TEST(Cate, LargeKGivesNaiveAte) {
  const Dataset est = noisy_data(20, 5);
  double yt = 0, yc = 0;
  for (const auto& u : est.units()) (u.treated() ? yt : yc) += u.y;
  const double naive = yt / 10.0 - yc / 10.0;
  const StretchMetric m({1.0, 1.0}, {});
  const Unit q = cont_unit("outsider", {0.3, -0.2}, 0, Arm::kControl);
  const auto g = matched_group(m, q, est, 20, 1);
  EXPECT_NEAR(cate_for_unit(q, g, est, EstimatorKind::kMean), naive, 1e-12);
}

TEST(Cate, PermutingUnitsLeavesEstimatesUnchanged) {
  const Dataset est = noisy_data(80, 6);
  std::vector<Unit> shuffled = est.units();
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const Dataset est2(est.schema(), shuffled);
  const StretchMetric m({0.5, 2.0}, {});
  for (const auto& q : est.units()) {
    const double a = cate_for_unit(q, matched_group(m, q, est, 5, 3), est, EstimatorKind::kMean);
    const double b = cate_for_unit(q, matched_group(m, q, est2, 5, 3), est2, EstimatorKind::kMean);
    EXPECT_NEAR(a, b, 1e-12);
  }
}

TEST(Honest, FourFoldsPerUnitAndStructuralHonesty) {
  const Dataset d = noisy_data(60, 7);
  TrainingConfig tc;
  tc.max_iters = 100;
  const HonestResult r = honest_estimate(d, 5, tc, 3, EstimatorKind::kMean, 11);
  ASSERT_EQ(r.results.size(), d.size());
  for (const auto& res : r.results) EXPECT_EQ(res.n_folds, 4);
  for (const auto& fe : r.fold_estimates) {
    EXPECT_NE(r.plan.assignment[fe.unit], fe.fold);
    for (Arm arm : {Arm::kControl, Arm::kTreated})
      for (const auto& m : fe.group.members(arm)) {
        EXPECT_NE(r.plan.assignment[m.index], fe.fold);
        EXPECT_EQ(d[m.index].id, m.id);
        EXPECT_NE(m.index, fe.unit);
      }
  }
  for (const auto& g : r.groups)
    for (const auto& [id, count] : g.member_weights) {
      EXPECT_GE(count, 1);
      EXPECT_LE(count, 4);
    }
  std::vector<double> sum(r.averaged_metric.size(), 0.0);
  for (const auto& m : r.fold_metrics)
    for (std::size_t j = 0; j < m.size(); ++j) sum[j] += m.flat()[j];
  for (std::size_t j = 0; j < sum.size(); ++j) EXPECT_NEAR(r.averaged_metric.flat()[j], sum[j] / 5.0, 1e-15);
}

TEST(Honest, OutcomeEqualToTreatmentGivesUnitEffect) {
  const Dataset d = noisy_data(40, 8, true);
  TrainingConfig tc;
  tc.max_iters = 50;
  const HonestResult r = honest_estimate(d, 5, tc, 3, EstimatorKind::kMean, 2);
  for (const auto& res : r.results) EXPECT_DOUBLE_EQ(res.cate_hat, 1.0);
}

TEST(Honest, DeterministicAndFixedMetric) {
  const Dataset d = noisy_data(50, 9);
  HonestOptions o;
  o.k = 4;
  o.training.max_iters = 80;
  o.seed = 5;
  const auto a = honest_estimate(d, o);
  const auto b = honest_estimate(d, o);
  std::ostringstream sa, sb;
  write_results_csv(sa, a.results);
  write_results_csv(sb, b.results);
  EXPECT_EQ(sa.str(), sb.str());

  o.fixed_metric = StretchMetric({1.0, 1.0}, {});
  const auto c = honest_estimate(d, o);
  EXPECT_TRUE(c.fit_reports.empty());
  for (const auto& m : c.fold_metrics) EXPECT_EQ(m, *o.fixed_metric);
}

TEST(Honest, FoldMissingAnArmIsNamed) {
  std::vector<Unit> units;
  for (int i = 0; i < 12; ++i) units.push_back(cont_unit(std::to_string(i), {double(i)}, 0, Arm::kControl));
  units.push_back(cont_unit("t", {0}, 0, Arm::kTreated));
  units.push_back(cont_unit("t2", {1}, 0, Arm::kTreated));
  const Dataset d(malts::testing::cont_schema(1), units);
  try {
    honest_estimate(d, 2, TrainingConfig{}, 2, EstimatorKind::kMean, 0);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("fold"), std::string::npos) << e.what();
  }
}

TEST(Pruning, MarksUnitsWithOnlyWideGroups) {
  const Dataset d = noisy_data(60, 10);
  HonestOptions o;
  o.k = 3;
  o.fixed_metric = StretchMetric({1.0, 1.0}, {});
  auto r = honest_estimate(d, o);
  const auto unpruned = r.results;
  std::vector<double> diam;
  for (const auto& fe : r.fold_estimates) diam.push_back(fe.group.diameter);
  std::sort(diam.begin(), diam.end());
  const double th = diam[diam.size() / 2];
  apply_pruning(r, d, th);
  for (std::size_t i = 0; i < d.size(); ++i) {
    double s = 0;
    int kept = 0;
    for (const auto& fe : r.fold_estimates)
      if (fe.unit == i && fe.group.diameter <= th) {
        s += fe.cate;
        ++kept;
      }
    EXPECT_EQ(r.results[i].pruned, kept == 0);
    if (kept) {
      EXPECT_NEAR(r.results[i].cate_hat, s / kept, 1e-12);
    } else {
      EXPECT_NEAR(r.results[i].cate_hat, unpruned[i].cate_hat, 1e-12);
    }
  }
  EXPECT_THROW(apply_pruning(r, d, 0.0), ConfigError);
}

TEST(Ate, Examples) {
  auto result = [](double cate, bool pruned) {
    CATEResult r;
    r.cate_hat = cate;
    r.pruned = pruned;
    return r;
  };
  std::vector<CATEResult> rs{result(1, false), result(3, false)};
  EXPECT_DOUBLE_EQ(ate(rs, false), 2.0);
  const std::vector<CATEResult> with_pruned{result(1, false), result(3, false), result(100, true)};
  EXPECT_DOUBLE_EQ(ate(with_pruned, false), 2.0);
  const std::vector<CATEResult> all_pruned{result(1, true), result(3, true)};
  EXPECT_THROW(ate(all_pruned, false), InfeasibleError);
}

TEST(ResultFiles, RoundTrip) {
  const Dataset d = noisy_data(30, 12);
  HonestOptions o;
  o.k = 3;
  o.fixed_metric = StretchMetric({1.0, 1.0}, {});
  const auto r = honest_estimate(d, o);
  std::stringstream a, g;
  write_results_csv(a, r.results);
  write_groups_csv(g, r.groups);
  const auto back = read_results_csv(a);
  ASSERT_EQ(back.size(), r.results.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].unit_id, r.results[i].unit_id);
    EXPECT_EQ(back[i].cate_hat, r.results[i].cate_hat);
    EXPECT_EQ(back[i].n_folds, r.results[i].n_folds);
  }
  const auto gb = read_groups_csv(g);
  ASSERT_EQ(gb.size(), r.groups.size());
  for (std::size_t i = 0; i < gb.size(); ++i) EXPECT_EQ(gb[i].member_weights, r.groups[i].member_weights);
}

TEST(Options, Validation) {
  HonestOptions o;
  o.kind = EstimatorKind::kLinearRegression;
  o.k = 3;
  EXPECT_THROW(o.validate(malts::testing::cont_schema(2)), ConfigError);
  EXPECT_THROW(parse_estimator("median"), ConfigError);
  EXPECT_EQ(parse_cate_mode("own_outcome"), CateMode::kOwnOutcome);
}

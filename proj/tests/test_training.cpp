#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "malts/errors.hpp"
#include "malts/training.hpp"

using namespace malts;
using malts::testing::cont_unit;

namespace {

// Two-loop reference of the leave-one-out soft-KNN loss, no max shift.
double reference_arm_loss(const StretchMetric& m, const std::vector<Unit>& units) {
  double loss = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < units.size(); ++l) {
      if (l == i) continue;
      const double w = std::exp(-distance(m, units[i], units[l]));
      num += w * units[l].y;
      den += w;
    }
    loss += std::fabs(units[i].y - num / den);
  }
  return loss;
}

Dataset two_covariate_data(std::size_t per_arm, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z, noise(0.0, 0.1);
  std::vector<Unit> units;
  for (std::size_t i = 0; i < 2 * per_arm; ++i) {
    const double rel = z(rng), irr = z(rng);
    units.push_back(cont_unit(std::to_string(i), {rel, irr}, 10.0 * rel + noise(rng),
                              i < per_arm ? Arm::kControl : Arm::kTreated));
  }
  return Dataset(malts::testing::cont_schema(2), std::move(units));
}

}  // namespace

TEST(SoftWeights, Examples) {
  const StretchMetric m({1.0}, {});
  const Unit q = cont_unit("q", {0}, 0, Arm::kControl);
  const std::vector<Unit> sym{cont_unit("a", {2}, 0, Arm::kControl), cont_unit("b", {-2}, 0, Arm::kControl),
                              cont_unit("c", {2}, 0, Arm::kControl)};
  for (double w : soft_weights(m, q, sym)) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);

  const std::vector<Unit> two{cont_unit("a", {0}, 0, Arm::kControl),
                              cont_unit("b", {std::log(2.0)}, 0, Arm::kControl)};
  const auto w = soft_weights(m, q, two);
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);

  const std::vector<Unit> one{cont_unit("a", {1e6}, 0, Arm::kControl)};
  EXPECT_EQ(soft_weights(m, q, one), std::vector<double>{1.0});
  EXPECT_THROW(soft_weights(m, q, std::vector<Unit>{}), InfeasibleError);
}

TEST(SoftWeights, SumToOneProperty) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 5.0);
  std::exponential_distribution<double> e(0.5);
  for (int rep = 0; rep < 500; ++rep) {
    const StretchMetric m({e(rng), e(rng)}, {});
    std::vector<Unit> pool;
    const int n = 1 + rep % 40;
    for (int i = 0; i < n; ++i) pool.push_back(cont_unit(std::to_string(i), {z(rng), z(rng)}, 0, Arm::kControl));
    const auto w = soft_weights(m, cont_unit("q", {z(rng), z(rng)}, 0, Arm::kControl), pool);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(ArmLoss, Examples) {
  const StretchMetric zero({0.0}, {});
  EXPECT_DOUBLE_EQ(arm_loss(zero, std::vector<Unit>{cont_unit("a", {0}, 0, Arm::kControl),
                                                    cont_unit("b", {9}, 2, Arm::kControl)}),
                   4.0);
  EXPECT_EQ(arm_loss(zero, std::vector<Unit>{cont_unit("a", {0}, 5, Arm::kControl),
                                             cont_unit("b", {1}, 5, Arm::kControl),
                                             cont_unit("c", {2}, 5, Arm::kControl)}),
            0.0);
  EXPECT_THROW(arm_loss(zero, std::vector<Unit>{cont_unit("a", {0}, 0, Arm::kControl)}), InfeasibleError);
}

TEST(ArmLoss, LineLimit) {
  const std::vector<Unit> line{cont_unit("a", {0}, 0, Arm::kControl), cont_unit("b", {1}, 1, Arm::kControl),
                               cont_unit("c", {100}, 100, Arm::kControl)};
  const StretchMetric m({50.0}, {});
  // Unit c sees b at 4950 and a at 5000, so its prediction is 1 / (1 + e^-50).
  const double oracle = 1.0 + 1.0 + (100.0 - 1.0 / (1.0 + std::exp(-50.0)));
  EXPECT_NEAR(arm_loss(m, line), oracle, 1e-9);
  EXPECT_NEAR(arm_loss(m, line), 101.0, 1e-9);
}

TEST(ArmLoss, MatchesTwoLoopReferenceAndIsOrderFree) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  std::exponential_distribution<double> e(1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Unit> units;
    for (int i = 0; i < 2 + rep % 30; ++i)
      units.push_back(cont_unit(std::to_string(i), {z(rng), z(rng)}, 3 * z(rng), Arm::kControl));
    const StretchMetric m({e(rng), e(rng)}, {});
    const double loss = arm_loss(m, units);
    EXPECT_NEAR(loss, reference_arm_loss(m, units), 1e-10 * std::max(1.0, loss));
    std::shuffle(units.begin(), units.end(), rng);
    EXPECT_NEAR(arm_loss(m, units), loss, 1e-10 * std::max(1.0, loss));
  }
}

TEST(Objective, Examples) {
  const auto schema = malts::testing::cont_schema(1);
  const Dataset d(schema, {cont_unit("c0", {0}, 0, Arm::kControl), cont_unit("c1", {1}, 2, Arm::kControl),
                           cont_unit("t0", {0}, 1, Arm::kTreated), cont_unit("t1", {1}, 3, Arm::kTreated)});
  TrainingConfig cfg;
  cfg.reg_c = 0.0;
  EXPECT_DOUBLE_EQ(objective(StretchMetric({0.0}, {}), d, cfg), 8.0);
  cfg.reg_c = 123.0;
  EXPECT_DOUBLE_EQ(objective(StretchMetric({0.0}, {}), d, cfg), 8.0);

  const StretchMetric m({0.7}, {});
  TrainingConfig c0, c1;
  c0.reg_c = 0.0;
  c1.reg_c = 1.0;
  EXPECT_NEAR(objective(m, d, c1) - objective(m, d, c0), frobenius_norm(m), 1e-14);
  EXPECT_GE(objective(m, d, c1), frobenius_norm(m));
}

TEST(Fit, SeparatesRelevantFromIrrelevant) {
  const Dataset d = two_covariate_data(200, 1);
  TrainingConfig cfg;
  cfg.seed = 4;
  const FitResult r = fit_metric(d, cfg);
  const auto& w = r.metric.cont_weights();
  EXPECT_GT(w[0], 3.0 * w[1]) << w[0] << " vs " << w[1];
  EXPECT_LE(r.report.final_objective, r.report.initial_objective);
  const double fro = frobenius_norm(r.metric);
  EXPECT_LE(fro, r.report.zero_objective / cfg.reg_c);
}

TEST(Fit, ConstantOutcomeGivesZeroLoss) {
  std::vector<Unit> units;
  for (int i = 0; i < 12; ++i)
    units.push_back(cont_unit(std::to_string(i), {0.1 * i}, 4.0, i % 2 ? Arm::kTreated : Arm::kControl));
  const Dataset d(malts::testing::cont_schema(1), units);
  TrainingConfig cfg;
  cfg.reg_c = 0.0;
  const FitResult r = fit_metric(d, cfg);
  EXPECT_EQ(r.report.zero_objective, 0.0);
  EXPECT_LE(r.report.final_objective, 0.0);
}

TEST(Fit, DescentAndDeterminismForBothOptimizers) {
  const Dataset d = two_covariate_data(40, 2);
  for (auto kind : {OptimizerKind::kNelderMead, OptimizerKind::kCoordinateDescent}) {
    TrainingConfig cfg;
    cfg.optimizer = kind;
    cfg.seed = 9;
    cfg.max_iters = 300;
    const FitResult a = fit_metric(d, cfg);
    const FitResult b = fit_metric(d, cfg);
    EXPECT_EQ(a.metric, b.metric);
    EXPECT_LE(a.report.final_objective, a.report.initial_objective);
    EXPECT_NEAR(a.report.final_objective, objective(a.metric, d, cfg), 1e-9);
  }
}

TEST(Fit, FrobeniusBoundHoldsAcrossPenalties) {
  const Dataset d = two_covariate_data(30, 3);
  for (double c : {1e-3, 1e-1, 1.0, 10.0}) {
    TrainingConfig cfg;
    cfg.reg_c = c;
    cfg.max_iters = 200;
    const FitResult r = fit_metric(d, cfg);
    if (r.report.final_objective <= r.report.zero_objective) {
      EXPECT_LE(frobenius_norm(r.metric), r.report.zero_objective / c);
    }
  }
}

TEST(TrainingConfigCheck, RejectsBadValues) {
  TrainingConfig cfg;
  cfg.reg_c = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_optimizer("bfgs"), ConfigError);
  EXPECT_EQ(parse_optimizer("coordinate_descent"), OptimizerKind::kCoordinateDescent);
}

TEST(PairLoss, HandComputed) {
  // Two units at distance 0 with |dy| = 2: (1/4) * 2 * 2 = 1.
  const std::vector<Unit> units{cont_unit("a", {0}, 0, Arm::kControl), cont_unit("b", {0}, 2, Arm::kControl)};
  EXPECT_DOUBLE_EQ(empirical_pair_loss(StretchMetric({1.0}, {}), units), 1.0);
}

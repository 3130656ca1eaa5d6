#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "malts/data.hpp"
#include "malts/metric.hpp"

namespace malts {

enum class OptimizerKind { kNelderMead, kCoordinateDescent };

const char* to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(const std::string& name);

struct TrainingConfig {
  double reg_c = 0.001;  // Frobenius penalty coefficient
  int max_iters = 2000;
  double tol = 1e-6;  // relative
  double init_weight = 1.0;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kNelderMead;

  void validate() const;
};

// Softmax of negated distances from `query` to each pool unit, computed with
// a max shift. The caller keeps the query out of the pool.
std::vector<double> soft_weights(const StretchMetric& m, const Unit& query, std::span<const Unit> pool);

// Leave-one-out soft-KNN absolute error within one arm:
//   sum_i | y_i - sum_{l != i} w_il y_l |.
double arm_loss(const StretchMetric& m, std::span<const Unit> units);

// reg_c * ||M||_F + arm_loss(controls) + arm_loss(treated).
double objective(const StretchMetric& m, const Dataset& train, const TrainingConfig& cfg);

// Pairwise loss averaged over all n^2 ordered pairs of one arm:
//   (1/n^2) sum_{i,l} exp(-d(x_i, x_l)) |y_i - y_l|.
double empirical_pair_loss(const StretchMetric& m, std::span<const Unit> units);

// Sum over arms of |L_emp(train arm) - L_emp(heldout arm)|.
double generalization_gap(const StretchMetric& m, const Dataset& train, const Dataset& heldout);

struct FitReport {
  double initial_objective = 0.0;
  double zero_objective = 0.0;  // objective at the all-zero metric
  double final_objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct FitResult {
  StretchMetric metric;
  FitReport report;
};

// Minimizes objective() over nonnegative weights. The search runs over v with
// w = v * v, so every candidate is feasible.
FitResult fit_metric(const Dataset& train, const TrainingConfig& cfg);

// key = value block: final_objective, iterations, converged, ...
void write_fit_report(std::ostream& out, const FitReport& report);

}  // namespace malts

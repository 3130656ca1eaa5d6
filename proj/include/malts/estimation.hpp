#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "malts/data.hpp"
#include "malts/matching.hpp"
#include "malts/metric.hpp"
#include "malts/training.hpp"

namespace malts {

enum class EstimatorKind { kMean, kSoftmaxWeightedMean, kLinearRegression };

const char* to_string(EstimatorKind kind) noexcept;
EstimatorKind parse_estimator(const std::string& name);

// kBothArms: phi(treated members) - phi(control members).
// kOwnOutcome: the query's observed outcome replaces phi on its own arm.
enum class CateMode { kBothArms, kOwnOutcome };

const char* to_string(CateMode mode) noexcept;
CateMode parse_cate_mode(const std::string& name);

struct MemberRef {
  const Unit* unit = nullptr;
  double distance = 0.0;
};

// Counterfactual outcome estimate from one arm's matched members.
//   mean                  arithmetic mean of outcomes
//   softmax_weighted_mean weights proportional to exp(-distance)
//   linear_regression     OLS of outcome on continuous covariates with an
//                         intercept, evaluated at `target`; the mean is used
//                         when the design is rank deficient
double phi(EstimatorKind kind, std::span<const MemberRef> members, const Unit& target);

// Members of `group` on one arm resolved against `est`.
std::vector<MemberRef> resolve(const MatchedGroup& group, Arm arm, const Dataset& est);

double cate_for_unit(const Unit& query, const MatchedGroup& group, const Dataset& est, EstimatorKind kind,
                     CateMode mode = CateMode::kBothArms);

struct CATEResult {
  std::string unit_id;
  double cate_hat = 0.0;
  int n_folds = 0;
  double mean_diameter = 0.0;
  // No unpruned group is left; cate_hat then holds the all-fold mean and
  // only feeds diagnostics.
  bool pruned = false;
  // Mean over folds of the within-group outcome standard deviation.
  double control_spread = 0.0;
  double treated_spread = 0.0;
};

struct UnifiedGroup {
  std::string unit_id;
  std::map<std::string, int> member_weights;  // member id -> folds it appeared in
};

// One unit's estimate from one fold. Group member indices refer to the full
// dataset.
struct FoldEstimate {
  std::size_t unit = 0;
  int fold = 0;
  double cate = 0.0;
  MatchedGroup group;
};

struct HonestOptions {
  int eta = 5;
  std::size_t k = 10;
  EstimatorKind kind = EstimatorKind::kMean;
  CateMode mode = CateMode::kBothArms;
  TrainingConfig training;
  bool standardize = false;  // z-score continuous covariates with training-fold statistics
  std::uint64_t seed = 0;
  // When set, every fold uses this metric and no training happens.
  std::optional<StretchMetric> fixed_metric;

  void validate(const CovariateSchema& schema) const;
};

struct HonestResult {
  FoldPlan plan;
  std::vector<CATEResult> results;  // dataset order
  std::vector<UnifiedGroup> groups;  // dataset order
  std::vector<StretchMetric> fold_metrics;
  std::vector<FitReport> fit_reports;  // empty for fixed metrics
  StretchMetric averaged_metric;
  std::vector<FoldEstimate> fold_estimates;
  std::optional<double> prune_threshold;
};

// For each fold f the metric is fit on fold f alone and every unit outside f
// gets a matched group and CATE from the remaining eta - 1 folds. Per-unit
// estimates are averaged over folds.
HonestResult honest_estimate(const Dataset& data, const HonestOptions& opts);
HonestResult honest_estimate(const Dataset& data, int eta, const TrainingConfig& train_cfg, std::size_t k,
                             EstimatorKind kind, std::uint64_t seed);

// Marks fold groups with diameter above `threshold` as pruned and recomputes
// each unit's CATE from its remaining groups.
void apply_pruning(HonestResult& result, const Dataset& data, double threshold);

// Tukey fence over all fold group diameters.
double auto_prune_threshold(const HonestResult& result);

double ate(std::span<const CATEResult> results, bool include_pruned);

void write_results_csv(std::ostream& out, std::span<const CATEResult> results);
std::vector<CATEResult> read_results_csv(std::istream& in);
void write_groups_csv(std::ostream& out, std::span<const UnifiedGroup> groups);
std::vector<UnifiedGroup> read_groups_csv(std::istream& in);

}  // namespace malts

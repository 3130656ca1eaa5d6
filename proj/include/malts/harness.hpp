#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "malts/data.hpp"
#include "malts/estimation.hpp"
#include "malts/simulation.hpp"
#include "malts/training.hpp"

namespace malts {

enum class DgpKind { kQuadratic, kFriedman, kSensitivity, kOverlap };

const char* to_string(DgpKind kind) noexcept;
DgpKind parse_dgp(const std::string& name);

struct DgpSpec {
  DgpKind kind = DgpKind::kQuadratic;
  QuadraticParams quadratic;  // kQuadratic; its n and seed are overridden
  std::size_t n = 500;
  double gamma_y = 0.0;  // kSensitivity
  double gamma_t = 0.0;
  double sigma_t = 20.0;  // kOverlap
};

// Dataset plus optional ground truth, as produced by a DGP or a CSV load.
struct SourceData {
  Dataset data;
  std::optional<SimTruth> truth;
};

SourceData simulate(const DgpSpec& spec, std::uint64_t seed);

enum class PruneMode { kOff, kThreshold, kAuto };

struct ExperimentConfig {
  std::optional<DgpSpec> dgp;
  std::optional<std::filesystem::path> input_csv;
  CovariateSchema schema;           // used with input_csv
  std::optional<double> true_ate;   // external truth for CSV input
  int eta = 5;
  std::size_t k = 10;
  TrainingConfig training;
  EstimatorKind kind = EstimatorKind::kMean;
  CateMode mode = CateMode::kBothArms;
  bool standardize = false;
  PruneMode prune = PruneMode::kOff;
  double prune_threshold = 0.0;
  bool baseline = false;  // also run the unweighted-metric matcher
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir = "malts_out";

  void validate() const;
  HonestOptions honest_options(std::uint64_t seed) const;
};

// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
nlohmann::json schema_to_json(const CovariateSchema& schema);
CovariateSchema schema_from_json(const nlohmann::json& j);

struct ErrorSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

// Quantiles use linear interpolation; throws on an empty sample.
ErrorSummary summarize(std::span<const double> values);

struct ErrorReport {
  std::string method;  // "malts" or "baseline"
  std::uint64_t seed = 0;
  std::vector<std::string> unit_ids;  // unpruned units with known truth
  std::vector<double> abs_error;
  std::optional<ErrorSummary> summary;
  double ate_hat = 0.0;           // after pruning (equal to ate_unpruned when pruning is off)
  double ate_unpruned = 0.0;
  std::size_t n_pruned = 0;
  std::optional<double> true_ate;
  std::optional<double> bias;
  std::optional<double> percent_bias;  // 100 (ate_hat - truth) / truth
};

ErrorReport make_error_report(std::string method, std::uint64_t seed, std::span<const CATEResult> results,
                              double ate_unpruned, const std::optional<SimTruth>& truth, const Dataset& data,
                              std::optional<double> external_truth);

nlohmann::json report_to_json(const ErrorReport& r);

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string message;
  int exit_code = 0;
};

struct ExperimentReport {
  std::vector<ErrorReport> reports;  // seed-major, malts before baseline
  std::vector<SeedFailure> failures;
  nlohmann::json aggregate;  // medians across successful seeds per method
};

// Same pipeline as honest_estimate with every weight fixed at 1 and no
// training step.
HonestResult baseline_estimate(const Dataset& data, int eta, std::size_t k, EstimatorKind kind, std::uint64_t seed);

// One output directory per seed (seed_<s>/) holding the dataset, truth, the
// averaged and per-fold metrics, fit reports, results, unified groups, tidy
// per-unit errors and a summary. A failing seed is recorded and skipped.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Recomputes the per-seed reports and the aggregate from the files written
// by run_experiment, without refitting anything.
ExperimentReport evaluate_directory(const std::filesystem::path& output_dir);

// Unified matched group of one unit laid out as a table: the query first,
// then members ordered by fold count. Throws LookupError on unknown ids.
std::string inspect_group(const Dataset& data, std::span<const CATEResult> results,
                          std::span<const UnifiedGroup> groups, const std::string& query_id);

// Loads data.csv, schema.json, results.csv and groups.csv from a seed
// directory and formats the group.
std::string inspect_seed_directory(const std::filesystem::path& seed_dir, const std::string& query_id,
                                   const std::string& method = "malts");

}  // namespace malts

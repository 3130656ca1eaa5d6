#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "malts/data.hpp"

namespace malts {

// Diagonal stretch metric: one nonnegative weight per continuous covariate
// (weighted Euclidean part) and one per discrete covariate (weighted Hamming
// part). Weights follow the schema's per-kind order.
class StretchMetric {
 public:
  StretchMetric() = default;
  // Throws ConfigError on negative or non-finite weights.
  StretchMetric(std::vector<double> cont_weights, std::vector<double> disc_weights);

  // Every weight set to `w`.
  static StretchMetric uniform(const CovariateSchema& schema, double w = 1.0);

  const std::vector<double>& cont_weights() const noexcept { return cont_; }
  const std::vector<double>& disc_weights() const noexcept { return disc_; }
  std::size_t size() const noexcept { return cont_.size() + disc_.size(); }

  // Continuous weights followed by discrete weights.
  std::vector<double> flat() const;
  static StretchMetric from_flat(std::span<const double> w, std::size_t num_continuous);

  StretchMetric scaled(double lambda) const;

  // Throws SchemaError when the weight counts differ from the schema.
  void check_schema(const CovariateSchema& schema) const;

  bool operator==(const StretchMetric&) const = default;

 private:
  std::vector<double> cont_;
  std::vector<double> disc_;
};

// ||diag(w_c)(a_c - b_c)||_2 + sum_j w_d[j] * [a_d[j] != b_d[j]].
// No arity checks; callers validate once per dataset.
double distance_unchecked(const StretchMetric& m, const Unit& a, const Unit& b) noexcept;

// Same as distance_unchecked but throws SchemaError on a dimension mismatch.
double distance(const StretchMetric& m, const Unit& a, const Unit& b);

double frobenius_norm(const StretchMetric& m) noexcept;

// Element-wise mean; all metrics must have the same shape.
StretchMetric average(std::span<const StretchMetric> metrics);

// Text format, one covariate per line:
//
//   # kind: continuous
//   age = 0.78
//
// Lines are emitted in schema order. Blank lines and other '#' comments are
// ignored on read; every schema covariate must appear exactly once.
void write_metric(std::ostream& out, const StretchMetric& m, const CovariateSchema& schema);
StretchMetric read_metric(std::istream& in, const CovariateSchema& schema);
void save_metric(const std::filesystem::path& path, const StretchMetric& m, const CovariateSchema& schema);
StretchMetric load_metric(const std::filesystem::path& path, const CovariateSchema& schema);

}  // namespace malts

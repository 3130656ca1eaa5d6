#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "malts/data.hpp"
#include "malts/metric.hpp"

namespace malts {

// Distances within this absolute tolerance are ties.
inline constexpr double kTieTolerance = 1e-12;

struct Neighbor {
  std::size_t index = 0;  // position in the pool (knn) or in the dataset (matched_group)
  std::string id;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// The k pool units closest to `query`, ascending by distance. Units tied at
// the k-th distance are chosen uniformly at random with `seed`. Returns the
// whole pool, sorted, when k >= |pool|.
std::vector<Neighbor> knn(const StretchMetric& m, const Unit& query, std::span<const Unit> pool, std::size_t k,
                          std::uint64_t seed);

// Same selection rule on precomputed distances; returns pool positions.
std::vector<std::size_t> select_nearest(std::span<const double> distances, std::size_t k, std::uint64_t seed);

struct MatchedGroup {
  std::string query_id;
  std::vector<Neighbor> control_members;
  std::vector<Neighbor> treated_members;
  double diameter = 0.0;  // largest member distance over both arms

  const std::vector<Neighbor>& members(Arm arm) const {
    return arm == Arm::kTreated ? treated_members : control_members;
  }
};

// Per-query seed, independent of the order in which queries are processed.
std::uint64_t query_seed(std::uint64_t seed, const std::string& query_id) noexcept;

// k nearest neighbours from each arm of `est`; the query itself (matched by
// id) is left out of its own arm. Neighbor::index refers to `est`.
MatchedGroup matched_group(const StretchMetric& m, const Unit& query, const Dataset& est, std::size_t k,
                           std::uint64_t seed);

struct PruneResult {
  std::vector<MatchedGroup> kept;
  std::vector<MatchedGroup> pruned;
};

// Groups with diameter <= threshold are kept.
PruneResult prune(std::span<const MatchedGroup> groups, double threshold);

// Tukey upper fence Q3 + 1.5 * IQR with linear-interpolation quantiles.
double suggest_threshold(std::span<const double> diameters);

}  // namespace malts

#include "malts/matching.hpp"

#include <algorithm>
#include <numeric>

#include "malts/errors.hpp"
#include "malts/random.hpp"
#include "malts/stats.hpp"

namespace malts {

std::vector<std::size_t> select_nearest(std::span<const double> distances, std::size_t k, std::uint64_t seed) {
  const std::size_t n = distances.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  if (k >= n) return order;

  const double cutoff = distances[order[k - 1]];
  auto first_tied = std::find_if(order.begin(), order.end(),
                                 [&](std::size_t i) { return distances[i] >= cutoff - kTieTolerance; });
  auto past_tied = std::find_if(first_tied, order.end(),
                                [&](std::size_t i) { return distances[i] > cutoff + kTieTolerance; });
  std::vector<std::size_t> tied(first_tied, past_tied);
  const auto sure = static_cast<std::size_t>(first_tied - order.begin());
  const std::size_t need = k - sure;

  std::vector<std::size_t> out(order.begin(), first_tied);
  if (tied.size() > need) {
    Rng rng(seed);
    std::shuffle(tied.begin(), tied.end(), rng);
    tied.resize(need);
    std::stable_sort(tied.begin(), tied.end(),
                     [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  }
  out.insert(out.end(), tied.begin(), tied.end());
  return out;
}

std::vector<Neighbor> knn(const StretchMetric& m, const Unit& query, std::span<const Unit> pool, std::size_t k,
                          std::uint64_t seed) {
  if (pool.empty()) throw InfeasibleError("knn: empty pool");
  if (k == 0) throw ConfigError("knn: k must be >= 1");
  std::vector<double> d(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) d[i] = distance(m, query, pool[i]);
  std::vector<Neighbor> out;
  for (auto i : select_nearest(d, k, seed)) out.push_back({i, pool[i].id, d[i]});
  return out;
}

std::uint64_t query_seed(std::uint64_t seed, const std::string& query_id) noexcept {
  return derive_seed(seed, hash_id(query_id));
}

MatchedGroup matched_group(const StretchMetric& m, const Unit& query, const Dataset& est, std::size_t k,
                           std::uint64_t seed) {
  if (k == 0) throw ConfigError("matched_group: k must be >= 1");
  m.check_schema(est.schema());
  if (query.x_cont.size() != m.cont_weights().size() || query.x_disc.size() != m.disc_weights().size()) {
    throw SchemaError("matched_group: query '" + query.id + "' does not match the metric");
  }
  MatchedGroup g;
  g.query_id = query.id;
  const std::uint64_t qs = query_seed(seed, query.id);
  std::vector<std::size_t> pool;
  std::vector<double> d;
  for (Arm arm : {Arm::kControl, Arm::kTreated}) {
    pool.clear();
    d.clear();
    for (std::size_t i = 0; i < est.size(); ++i) {
      const Unit& u = est[i];
      if (u.t != arm || u.id == query.id) continue;
      pool.push_back(i);
      d.push_back(distance_unchecked(m, query, u));
    }
    if (pool.empty()) {
      throw InfeasibleError("matched_group: no " + std::string(to_string(arm)) + " units available for query '" +
                            query.id + "'");
    }
    auto& members = arm == Arm::kTreated ? g.treated_members : g.control_members;
    for (auto p : select_nearest(d, k, derive_seed(qs, static_cast<std::uint64_t>(arm)))) {
      members.push_back({pool[p], est[pool[p]].id, d[p]});
      g.diameter = std::max(g.diameter, d[p]);
    }
  }
  return g;
}

PruneResult prune(std::span<const MatchedGroup> groups, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("prune: threshold must be > 0");
  PruneResult r;
  for (const auto& g : groups) (g.diameter <= threshold ? r.kept : r.pruned).push_back(g);
  return r;
}

double suggest_threshold(std::span<const double> diameters) {
  if (diameters.size() < 4) {
    throw ConfigError("suggest_threshold: need at least 4 diameters, have " + std::to_string(diameters.size()));
  }
  const double q1 = quantile(diameters, 0.25);
  const double q3 = quantile(diameters, 0.75);
  return q3 + 1.5 * (q3 - q1);
}

}  // namespace malts

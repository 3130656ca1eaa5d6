#include "malts/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "malts/csv.hpp"
#include "malts/errors.hpp"
#include "malts/parallel.hpp"
#include "malts/random.hpp"
#include "malts/stats.hpp"

namespace malts {

const char* to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::kMean:
      return "mean";
    case EstimatorKind::kSoftmaxWeightedMean:
      return "softmax_weighted_mean";
    case EstimatorKind::kLinearRegression:
      return "linear_regression";
  }
  return "?";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "mean") return EstimatorKind::kMean;
  if (name == "softmax_weighted_mean") return EstimatorKind::kSoftmaxWeightedMean;
  if (name == "linear_regression") return EstimatorKind::kLinearRegression;
  throw ConfigError("unknown estimator '" + name + "'");
}

const char* to_string(CateMode mode) noexcept {
  return mode == CateMode::kBothArms ? "both_arms" : "own_outcome";
}

CateMode parse_cate_mode(const std::string& name) {
  if (name == "both_arms") return CateMode::kBothArms;
  if (name == "own_outcome") return CateMode::kOwnOutcome;
  throw ConfigError("unknown CATE mode '" + name + "'");
}

// ---------------------------------------------------------------------------

namespace {

double plain_mean(std::span<const MemberRef> members) {
  double s = 0.0;
  for (const auto& m : members) s += m.unit->y;
  return s / static_cast<double>(members.size());
}

double regression_at(std::span<const MemberRef> members, const Unit& target) {
  const std::size_t p = target.x_cont.size();
  if (members.size() < p + 2) {
    throw ConfigError("linear_regression needs at least " + std::to_string(p + 2) + " members per arm, have " +
                      std::to_string(members.size()));
  }
  const auto n = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Unit& u = *members[static_cast<std::size_t>(i)].unit;
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) X(i, static_cast<Eigen::Index>(j + 1)) = u.x_cont[j];
    y(i) = u.y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) return plain_mean(members);
  const Eigen::VectorXd beta = qr.solve(y);
  double pred = beta(0);
  for (std::size_t j = 0; j < p; ++j) pred += beta(static_cast<Eigen::Index>(j + 1)) * target.x_cont[j];
  return pred;
}

}  // namespace

double phi(EstimatorKind kind, std::span<const MemberRef> members, const Unit& target) {
  if (members.empty()) throw InfeasibleError("phi: empty matched group");
  switch (kind) {
    case EstimatorKind::kMean:
      return plain_mean(members);
    case EstimatorKind::kSoftmaxWeightedMean: {
      double dmin = std::numeric_limits<double>::infinity();
      for (const auto& m : members) dmin = std::min(dmin, m.distance);
      double total = 0.0, weighted = 0.0;
      for (const auto& m : members) {
        const double w = std::exp(dmin - m.distance);
        total += w;
        weighted += w * m.unit->y;
      }
      return weighted / total;
    }
    case EstimatorKind::kLinearRegression:
      return regression_at(members, target);
  }
  throw ConfigError("phi: unknown estimator");
}

std::vector<MemberRef> resolve(const MatchedGroup& group, Arm arm, const Dataset& est) {
  std::vector<MemberRef> out;
  for (const auto& n : group.members(arm)) {
    if (n.index >= est.size() || est[n.index].id != n.id) {
      throw LookupError("matched group member '" + n.id + "' not found in the estimation set");
    }
    out.push_back({&est[n.index], n.distance});
  }
  return out;
}

double cate_for_unit(const Unit& query, const MatchedGroup& group, const Dataset& est, EstimatorKind kind,
                     CateMode mode) {
  const auto treated = resolve(group, Arm::kTreated, est);
  const auto control = resolve(group, Arm::kControl, est);
  if (treated.empty() || control.empty()) {
    throw InfeasibleError("cate_for_unit: matched group of '" + query.id + "' is missing an arm");
  }
  if (mode == CateMode::kOwnOutcome) {
    return query.treated() ? query.y - phi(kind, control, query) : phi(kind, treated, query) - query.y;
  }
  return phi(kind, treated, query) - phi(kind, control, query);
}

// ---------------------------------------------------------------------------

void HonestOptions::validate(const CovariateSchema& schema) const {
  if (eta < 2) throw ConfigError("eta must be >= 2");
  if (k == 0) throw ConfigError("k must be >= 1");
  training.validate();
  if (kind == EstimatorKind::kLinearRegression && k < schema.num_continuous() + 2) {
    throw ConfigError("linear_regression needs k >= " + std::to_string(schema.num_continuous() + 2));
  }
  if (fixed_metric) fixed_metric->check_schema(schema);
}

namespace {

double outcome_sd(std::span<const MemberRef> members) {
  std::vector<double> ys;
  for (const auto& m : members) ys.push_back(m.unit->y);
  return stddev(ys);
}

// Rebuilds per-unit results and unified groups from the fold estimates,
// skipping groups whose diameter exceeds `threshold`.
void aggregate(HonestResult& r, const Dataset& data, std::optional<double> threshold) {
  const std::size_t n = data.size();
  std::vector<std::vector<const FoldEstimate*>> per_unit(n);
  for (const auto& fe : r.fold_estimates) per_unit[fe.unit].push_back(&fe);

  r.results.assign(n, {});
  r.groups.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    CATEResult& res = r.results[i];
    UnifiedGroup& ug = r.groups[i];
    res.unit_id = ug.unit_id = data[i].id;
    const auto& ests = per_unit[i];
    if (ests.empty()) continue;

    double all_sum = 0.0, kept_sum = 0.0, diam = 0.0, sd_c = 0.0, sd_t = 0.0;
    int kept = 0;
    for (const FoldEstimate* fe : ests) {
      all_sum += fe->cate;
      diam += fe->group.diameter;
      const auto c = resolve(fe->group, Arm::kControl, data);
      const auto t = resolve(fe->group, Arm::kTreated, data);
      sd_c += outcome_sd(c);
      sd_t += outcome_sd(t);
      if (!threshold || fe->group.diameter <= *threshold) {
        kept_sum += fe->cate;
        ++kept;
      }
      for (const auto* arm : {&fe->group.control_members, &fe->group.treated_members})
        for (const auto& m : *arm) ++ug.member_weights[m.id];
    }
    const auto total = static_cast<int>(ests.size());
    res.mean_diameter = diam / total;
    res.control_spread = sd_c / total;
    res.treated_spread = sd_t / total;
    if (kept > 0) {
      res.cate_hat = kept_sum / kept;
      res.n_folds = kept;
      res.pruned = false;
    } else {
      res.cate_hat = all_sum / total;
      res.n_folds = total;
      res.pruned = true;
    }
  }
}

}  // namespace

HonestResult honest_estimate(const Dataset& data, const HonestOptions& opts) {
  opts.validate(data.schema());
  HonestResult r;
  r.plan = stratified_folds(data, opts.eta, opts.seed);

  // Each fold writes only its own slot so the result is scheduling-independent.
  std::vector<std::vector<FoldEstimate>> per_fold(static_cast<std::size_t>(opts.eta));
  r.fold_metrics.resize(static_cast<std::size_t>(opts.eta));
  if (!opts.fixed_metric) r.fit_reports.resize(static_cast<std::size_t>(opts.eta));

  for (int f = 0; f < opts.eta; ++f) {
    const auto train_idx = r.plan.members(f);
    const auto est_idx = r.plan.complement(f);
    for (auto i : est_idx) {
      if (r.plan.assignment[i] == f) throw NumericalError("honest_estimate: estimation unit in training fold");
    }
    const std::string fold_name = "fold " + std::to_string(f);

    const Dataset fold_view =
        opts.standardize ? Standardization::fit(data, train_idx).apply(data) : Dataset(data.schema(), data.units());
    const Dataset train = fold_view.subset(train_idx);
    const Dataset est = fold_view.subset(est_idx);
    train.require_arms(opts.fixed_metric ? 0 : 2, fold_name + " training set");
    est.require_arms(1, fold_name + " estimation set");

    StretchMetric metric;
    if (opts.fixed_metric) {
      metric = *opts.fixed_metric;
    } else {
      TrainingConfig tc = opts.training;
      tc.seed = derive_seed(opts.seed, 0x1000 + static_cast<std::uint64_t>(f));
      FitResult fit = fit_metric(train, tc);
      metric = fit.metric;
      r.fit_reports[static_cast<std::size_t>(f)] = fit.report;
    }
    r.fold_metrics[static_cast<std::size_t>(f)] = metric;

    auto& out = per_fold[static_cast<std::size_t>(f)];
    out.resize(est.size());
    const std::uint64_t match_seed = derive_seed(opts.seed, 0x2000 + static_cast<std::uint64_t>(f));
    parallel_for(est.size(), [&](std::size_t q) {
      const Unit& query = est[q];
      MatchedGroup g = matched_group(metric, query, est, opts.k, match_seed);
      const double cate = cate_for_unit(query, g, est, opts.kind, opts.mode);
      for (auto* arm : {&g.control_members, &g.treated_members})
        for (auto& m : *arm) m.index = est_idx[m.index];
      out[q] = FoldEstimate{est_idx[q], f, cate, std::move(g)};
    });
  }
  for (auto& fold : per_fold)
    for (auto& fe : fold) r.fold_estimates.push_back(std::move(fe));
  r.averaged_metric = average(r.fold_metrics);
  aggregate(r, data, std::nullopt);
  return r;
}

HonestResult honest_estimate(const Dataset& data, int eta, const TrainingConfig& train_cfg, std::size_t k,
                             EstimatorKind kind, std::uint64_t seed) {
  HonestOptions opts;
  opts.eta = eta;
  opts.training = train_cfg;
  opts.k = k;
  opts.kind = kind;
  opts.seed = seed;
  return honest_estimate(data, opts);
}

void apply_pruning(HonestResult& result, const Dataset& data, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("prune threshold must be > 0");
  result.prune_threshold = threshold;
  aggregate(result, data, threshold);
}

double auto_prune_threshold(const HonestResult& result) {
  std::vector<double> d;
  d.reserve(result.fold_estimates.size());
  for (const auto& fe : result.fold_estimates) d.push_back(fe.group.diameter);
  return suggest_threshold(d);
}

double ate(std::span<const CATEResult> results, bool include_pruned) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : results) {
    if (r.pruned && !include_pruned) continue;
    s += r.cate_hat;
    ++n;
  }
  if (n == 0) throw InfeasibleError("ate: no results selected");
  return s / static_cast<double>(n);
}


// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> read_header(std::istream& in, const char* what) {
  std::vector<std::string> header;
  if (!csv::read_record(in, header)) throw ParseError(std::string(what) + ": empty file");
  for (auto& h : header) h = csv::trim(h);
  return header;
}

}  // namespace

void write_results_csv(std::ostream& out, std::span<const CATEResult> results) {
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "unit_id,cate_hat,n_folds,mean_diameter,pruned\n";
  for (const auto& r : results) {
    out << csv::quote(r.unit_id) << ',' << r.cate_hat << ',' << r.n_folds << ',' << r.mean_diameter << ','
        << (r.pruned ? 1 : 0) << '\n';
  }
  out.precision(old_prec);
}

std::vector<CATEResult> read_results_csv(std::istream& in) {
  const auto header = read_header(in, "results");
  const auto c_id = csv::column(header, "unit_id");
  const auto c_cate = csv::column(header, "cate_hat");
  const auto c_folds = csv::column(header, "n_folds");
  const auto c_diam = csv::column(header, "mean_diameter");
  const auto c_pruned = csv::column(header, "pruned");
  std::vector<CATEResult> out;
  std::vector<std::string> f;
  std::size_t row = 0;
  while (csv::read_record(in, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    ++row;
    if (f.size() != header.size()) throw ParseError("results row " + std::to_string(row) + ": wrong field count");
    CATEResult r;
    std::int64_t folds = 0, pruned = 0;
    r.unit_id = f[c_id];
    if (!csv::parse_double(f[c_cate], r.cate_hat) || !csv::parse_integer(f[c_folds], folds) ||
        !csv::parse_double(f[c_diam], r.mean_diameter) || !csv::parse_integer(f[c_pruned], pruned)) {
      throw ParseError("results row " + std::to_string(row) + ": malformed value");
    }
    r.n_folds = static_cast<int>(folds);
    r.pruned = pruned != 0;
    out.push_back(std::move(r));
  }
  return out;
}

void write_groups_csv(std::ostream& out, std::span<const UnifiedGroup> groups) {
  out << "query_id,member_id,count\n";
  for (const auto& g : groups)
    for (const auto& [id, count] : g.member_weights)
      out << csv::quote(g.unit_id) << ',' << csv::quote(id) << ',' << count << '\n';
}

std::vector<UnifiedGroup> read_groups_csv(std::istream& in) {
  const auto header = read_header(in, "groups");
  const auto c_q = csv::column(header, "query_id");
  const auto c_m = csv::column(header, "member_id");
  const auto c_n = csv::column(header, "count");
  std::vector<UnifiedGroup> out;
  std::vector<std::string> f;
  std::size_t row = 0;
  while (csv::read_record(in, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    ++row;
    std::int64_t count = 0;
    if (f.size() != header.size() || !csv::parse_integer(f[c_n], count)) {
      throw ParseError("groups row " + std::to_string(row) + ": malformed record");
    }
    if (out.empty() || out.back().unit_id != f[c_q]) out.push_back({f[c_q], {}});
    out.back().member_weights[f[c_m]] = static_cast<int>(count);
  }
  return out;
}

}  // namespace malts

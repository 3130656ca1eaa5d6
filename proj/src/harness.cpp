#include "malts/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "malts/errors.hpp"
#include "malts/metric.hpp"
#include "malts/parallel.hpp"
#include "malts/stats.hpp"

namespace malts {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(DgpKind kind) noexcept {
  switch (kind) {
    case DgpKind::kQuadratic:
      return "quadratic";
    case DgpKind::kFriedman:
      return "friedman";
    case DgpKind::kSensitivity:
      return "sensitivity";
    case DgpKind::kOverlap:
      return "overlap";
  }
  return "?";
}

DgpKind parse_dgp(const std::string& name) {
  if (name == "quadratic") return DgpKind::kQuadratic;
  if (name == "friedman") return DgpKind::kFriedman;
  if (name == "sensitivity") return DgpKind::kSensitivity;
  if (name == "overlap") return DgpKind::kOverlap;
  throw ConfigError("unknown dgp '" + name + "'");
}

SourceData simulate(const DgpSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case DgpKind::kQuadratic: {
      QuadraticParams p = spec.quadratic;
      p.n = spec.n;
      p.seed = seed;
      auto q = quadratic_dgp(p);
      return {std::move(q.data), std::move(q.truth)};
    }
    case DgpKind::kFriedman: {
      auto s = friedman_dgp(spec.n, seed);
      return {std::move(s.data), std::move(s.truth)};
    }
    case DgpKind::kSensitivity: {
      auto s = sensitivity_dgp(spec.n, spec.gamma_y, spec.gamma_t, seed);
      return {std::move(s.data), std::move(s.truth)};
    }
    case DgpKind::kOverlap: {
      auto s = overlap_dgp(spec.n, spec.sigma_t, seed);
      return {std::move(s.data), std::move(s.truth)};
    }
  }
  throw ConfigError("unknown dgp");
}

// ---------------------------------------------------------------------------
// configuration

void ExperimentConfig::validate() const {
  if (dgp.has_value() == input_csv.has_value()) {
    throw ConfigError("exactly one data source (dgp or input_csv) is required");
  }
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (input_csv) schema.validate();
  if (prune == PruneMode::kThreshold && !(prune_threshold > 0.0)) {
    throw ConfigError("prune threshold must be > 0");
  }
  if (output_dir.empty()) throw ConfigError("output directory is required");
  if (eta < 2) throw ConfigError("eta must be >= 2");
  if (k == 0) throw ConfigError("k must be >= 1");
  training.validate();
}

HonestOptions ExperimentConfig::honest_options(std::uint64_t seed) const {
  HonestOptions o;
  o.eta = eta;
  o.k = k;
  o.kind = kind;
  o.mode = mode;
  o.training = training;
  o.standardize = standardize;
  o.seed = seed;
  return o;
}

json schema_to_json(const CovariateSchema& schema) {
  return json{{"continuous", schema.continuous_names()},
              {"discrete", schema.discrete_names()},
              {"outcome", schema.outcome_name},
              {"treatment", schema.treatment_name},
              {"order", schema.names}};
}

CovariateSchema schema_from_json(const json& j) {
  try {
    const auto cont = j.value("continuous", std::vector<std::string>{});
    const auto disc = j.value("discrete", std::vector<std::string>{});
    CovariateSchema s = CovariateSchema::from_lists(cont, disc, j.value("outcome", std::string("y")),
                                                    j.value("treatment", std::string("t")));
    if (j.contains("order")) {
      // Restore the original interleaving of kinds.
      const auto order = j.at("order").get<std::vector<std::string>>();
      CovariateSchema o;
      o.outcome_name = s.outcome_name;
      o.treatment_name = s.treatment_name;
      for (const auto& n : order) {
        const auto it = std::find(s.names.begin(), s.names.end(), n);
        if (it == s.names.end()) throw ConfigError("schema order names unknown covariate '" + n + "'");
        o.names.push_back(n);
        o.kinds.push_back(s.kinds[static_cast<std::size_t>(it - s.names.begin())]);
      }
      if (o.names.size() != s.names.size()) throw ConfigError("schema order does not list every covariate");
      o.validate();
      return o;
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
}

namespace {

const char* to_string(PruneMode m) {
  switch (m) {
    case PruneMode::kOff:
      return "off";
    case PruneMode::kThreshold:
      return "threshold";
    case PruneMode::kAuto:
      return "auto";
  }
  return "?";
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

QuadraticTerms parse_terms(const std::string& s) {
  if (s == "all_relevant") return QuadraticTerms::kAllRelevant;
  if (s == "exclude_last") return QuadraticTerms::kExcludeLast;
  throw ConfigError("unknown quadratic terms '" + s + "'");
}

DgpSpec dgp_from_json(const json& j) {
  reject_unknown(j,
                 {"kind", "n", "p_c", "k_c", "p_d", "k_d", "mu", "sigma_cov", "phi_bern", "sigma_t", "c_shift",
                  "gamma", "sigma_outcome", "terms", "gamma_y", "gamma_t"},
                 "dgp");
  DgpSpec d;
  d.kind = parse_dgp(j.value("kind", std::string("quadratic")));
  d.n = j.value("n", d.n);
  auto& q = d.quadratic;
  q.p_c = j.value("p_c", q.p_c);
  q.k_c = j.value("k_c", q.k_c);
  q.p_d = j.value("p_d", q.p_d);
  q.k_d = j.value("k_d", q.k_d);
  q.mu = j.value("mu", q.mu);
  q.sigma_cov = j.value("sigma_cov", q.sigma_cov);
  q.phi_bern = j.value("phi_bern", q.phi_bern);
  q.sigma_t = j.value("sigma_t", q.sigma_t);
  q.c_shift = j.value("c_shift", q.c_shift);
  q.gamma = j.value("gamma", q.gamma);
  q.sigma_outcome = j.value("sigma_outcome", q.sigma_outcome);
  if (j.contains("terms")) q.terms = parse_terms(j.at("terms").get<std::string>());
  d.gamma_y = j.value("gamma_y", d.gamma_y);
  d.gamma_t = j.value("gamma_t", d.gamma_t);
  d.sigma_t = j.value("sigma_t", d.sigma_t);
  return d;
}

json dgp_to_json(const DgpSpec& d) {
  const auto& q = d.quadratic;
  return json{{"kind", to_string(d.kind)},
              {"n", d.n},
              {"p_c", q.p_c},
              {"k_c", q.k_c},
              {"p_d", q.p_d},
              {"k_d", q.k_d},
              {"mu", q.mu},
              {"sigma_cov", q.sigma_cov},
              {"phi_bern", q.phi_bern},
              {"sigma_t", d.kind == DgpKind::kOverlap ? d.sigma_t : q.sigma_t},
              {"c_shift", q.c_shift},
              {"gamma", q.gamma},
              {"sigma_outcome", q.sigma_outcome},
              {"terms", q.terms == QuadraticTerms::kAllRelevant ? "all_relevant" : "exclude_last"},
              {"gamma_y", d.gamma_y},
              {"gamma_t", d.gamma_t}};
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  try {
    reject_unknown(j,
                   {"dgp", "input_csv", "schema", "true_ate", "eta", "k", "reg_c", "max_iters", "tol", "init_weight",
                    "optimizer", "estimator", "cate_mode", "standardize", "prune", "prune_threshold", "baseline",
                    "seeds", "output_dir"},
                   "config");
    ExperimentConfig c;
    if (j.contains("dgp")) c.dgp = dgp_from_json(j.at("dgp"));
    if (j.contains("input_csv")) c.input_csv = j.at("input_csv").get<std::string>();
    if (j.contains("schema")) c.schema = schema_from_json(j.at("schema"));
    if (j.contains("true_ate")) c.true_ate = j.at("true_ate").get<double>();
    c.eta = j.value("eta", c.eta);
    c.k = j.value("k", c.k);
    c.training.reg_c = j.value("reg_c", c.training.reg_c);
    c.training.max_iters = j.value("max_iters", c.training.max_iters);
    c.training.tol = j.value("tol", c.training.tol);
    c.training.init_weight = j.value("init_weight", c.training.init_weight);
    if (j.contains("optimizer")) c.training.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    if (j.contains("estimator")) c.kind = parse_estimator(j.at("estimator").get<std::string>());
    if (j.contains("cate_mode")) c.mode = parse_cate_mode(j.at("cate_mode").get<std::string>());
    c.standardize = j.value("standardize", c.standardize);
    if (j.contains("prune")) {
      const auto& p = j.at("prune");
      if (p.is_number()) {
        c.prune = PruneMode::kThreshold;
        c.prune_threshold = p.get<double>();
      } else {
        const auto s = p.get<std::string>();
        if (s == "off") c.prune = PruneMode::kOff;
        else if (s == "auto") c.prune = PruneMode::kAuto;
        else if (s == "threshold") c.prune = PruneMode::kThreshold;
        else throw ConfigError("prune must be 'off', 'auto', 'threshold' or a number");
      }
    }
    c.prune_threshold = j.value("prune_threshold", c.prune_threshold);
    c.baseline = j.value("baseline", c.baseline);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"eta", c.eta},
         {"k", c.k},
         {"reg_c", c.training.reg_c},
         {"max_iters", c.training.max_iters},
         {"tol", c.training.tol},
         {"init_weight", c.training.init_weight},
         {"optimizer", to_string(c.training.optimizer)},
         {"estimator", to_string(c.kind)},
         {"cate_mode", to_string(c.mode)},
         {"standardize", c.standardize},
         {"prune", to_string(c.prune)},
         {"prune_threshold", c.prune_threshold},
         {"baseline", c.baseline},
         {"seeds", c.seeds},
         {"output_dir", c.output_dir.string()}};
  if (c.dgp) j["dgp"] = dgp_to_json(*c.dgp);
  if (c.input_csv) {
    j["input_csv"] = c.input_csv->string();
    j["schema"] = schema_to_json(c.schema);
  }
  if (c.true_ate) j["true_ate"] = *c.true_ate;
  return j;
}

// ---------------------------------------------------------------------------
// reports

ErrorSummary summarize(std::span<const double> values) {
  ErrorSummary s;
  s.min = quantile(values, 0.0);
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  s.max = quantile(values, 1.0);
  s.mean = mean(values);
  return s;
}

ErrorReport make_error_report(std::string method, std::uint64_t seed, std::span<const CATEResult> results,
                              double ate_unpruned, const std::optional<SimTruth>& truth, const Dataset& data,
                              std::optional<double> external_truth) {
  ErrorReport r;
  r.method = std::move(method);
  r.seed = seed;
  r.ate_unpruned = ate_unpruned;
  for (const auto& c : results) r.n_pruned += c.pruned ? 1 : 0;
  r.ate_hat = ate(results, false);
  if (truth) {
    double sum = 0.0;
    for (double v : truth->true_cate) sum += v;
    r.true_ate = sum / static_cast<double>(truth->true_cate.size());
    for (const auto& c : results) {
      if (c.pruned) continue;
      const std::size_t i = data.index_of(c.unit_id);
      r.unit_ids.push_back(c.unit_id);
      r.abs_error.push_back(std::fabs(c.cate_hat - truth->true_cate[i]));
    }
    if (!r.abs_error.empty()) r.summary = summarize(r.abs_error);
  } else if (external_truth) {
    r.true_ate = external_truth;
  }
  if (r.true_ate) {
    r.bias = r.ate_hat - *r.true_ate;
    if (*r.true_ate != 0.0) r.percent_bias = 100.0 * *r.bias / *r.true_ate;
  }
  return r;
}

json report_to_json(const ErrorReport& r) {
  json j{{"method", r.method},
         {"seed", r.seed},
         {"ate_hat", r.ate_hat},
         {"ate_unpruned", r.ate_unpruned},
         {"n_pruned", r.n_pruned},
         {"n_scored", r.abs_error.size()}};
  if (r.summary) {
    const auto& s = *r.summary;
    j["abs_error"] = {{"min", s.min}, {"q1", s.q1}, {"median", s.median},
                      {"q3", s.q3},   {"max", s.max}, {"mean", s.mean}};
  }
  if (r.true_ate) j["true_ate"] = *r.true_ate;
  if (r.bias) j["bias"] = *r.bias;
  if (r.percent_bias) j["percent_bias"] = *r.percent_bias;
  return j;
}

namespace {

json aggregate_reports(const std::vector<ErrorReport>& reports) {
  std::map<std::string, std::vector<const ErrorReport*>> by_method;
  for (const auto& r : reports) by_method[r.method].push_back(&r);
  json agg = json::object();
  for (const auto& [method, rs] : by_method) {
    std::vector<double> med, ates, bias;
    for (const auto* r : rs) {
      if (r->summary) med.push_back(r->summary->median);
      ates.push_back(r->ate_hat);
      if (r->bias) bias.push_back(std::fabs(*r->bias));
    }
    json m{{"seeds", rs.size()}, {"median_ate", median(ates)}};
    if (!med.empty()) m["median_of_median_abs_error"] = median(med);
    if (!bias.empty()) m["median_abs_bias"] = median(bias);
    agg[method] = m;
  }
  return agg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::string suffix(const std::string& method) { return method == "malts" ? "" : "_" + method; }

void write_tidy_errors(std::ostream& out, const ErrorReport& r, std::span<const CATEResult> results,
                       const std::optional<SimTruth>& truth, const Dataset& data) {
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& c : results) {
    out << r.seed << ',' << r.method << ',' << c.unit_id << ',';
    if (truth) {
      const double tau = truth->true_cate[data.index_of(c.unit_id)];
      out << tau << ',' << c.cate_hat << ',' << std::fabs(c.cate_hat - tau);
    } else {
      out << ',' << c.cate_hat << ',';
    }
    out << ',' << (c.pruned ? 1 : 0) << '\n';
  }
  out.precision(old_prec);
}

SourceData load_source(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.dgp) return simulate(*cfg.dgp, seed);
  return {load_csv(*cfg.input_csv, cfg.schema), std::nullopt};
}

struct MethodRun {
  std::string method;
  HonestResult result;
  double ate_unpruned = 0.0;
  std::vector<CATEResult> unpruned;
};

void finish_pruning(const ExperimentConfig& cfg, MethodRun& run, const Dataset& data) {
  run.unpruned = run.result.results;
  run.ate_unpruned = ate(run.unpruned, true);
  double threshold = 0.0;
  if (cfg.prune == PruneMode::kThreshold) {
    threshold = cfg.prune_threshold;
  } else if (cfg.prune == PruneMode::kAuto) {
    threshold = auto_prune_threshold(run.result);
    // All diameters zero: nothing can be pruned.
    if (!(threshold > 0.0)) return;
  } else {
    return;
  }
  apply_pruning(run.result, data, threshold);
}

std::vector<ErrorReport> run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const fs::path dir = cfg.output_dir / seed_dir_name(seed);
  fs::create_directories(dir);
  SourceData src = load_source(cfg, seed);
  const Dataset& data = src.data;

  save_csv(dir / "data.csv", data);
  write_text(dir / "schema.json", schema_to_json(data.schema()).dump(2) + "\n");
  if (src.truth) {
    std::ofstream t(dir / "truth.csv", std::ios::binary);
    write_truth_csv(t, data, *src.truth);
  }

  std::vector<MethodRun> runs;
  runs.push_back({"malts", honest_estimate(data, cfg.honest_options(seed)), 0.0, {}});
  if (cfg.baseline) {
    HonestOptions o = cfg.honest_options(seed);
    o.fixed_metric = StretchMetric::uniform(data.schema(), 1.0);
    runs.push_back({"baseline", honest_estimate(data, o), 0.0, {}});
  }

  std::vector<ErrorReport> reports;
  std::ostringstream tidy;
  tidy << "seed,method,unit_id,true_cate,cate_hat,abs_error,pruned\n";
  json summary = json::object();
  for (auto& run : runs) {
    finish_pruning(cfg, run, data);
    const std::string sfx = suffix(run.method);
    const auto& res = run.result;
    {
      std::ofstream out(dir / ("results" + sfx + ".csv"), std::ios::binary);
      write_results_csv(out, res.results);
    }
    if (res.prune_threshold) {
      std::ofstream out(dir / ("results_unpruned" + sfx + ".csv"), std::ios::binary);
      write_results_csv(out, run.unpruned);
    }
    {
      std::ofstream out(dir / ("groups" + sfx + ".csv"), std::ios::binary);
      write_groups_csv(out, res.groups);
    }
    save_metric(dir / ("metric" + sfx + ".txt"), res.averaged_metric, data.schema());
    for (std::size_t f = 0; f < res.fold_metrics.size(); ++f) {
      save_metric(dir / ("fold_" + std::to_string(f) + "_metric" + sfx + ".txt"), res.fold_metrics[f],
                  data.schema());
    }
    for (std::size_t f = 0; f < res.fit_reports.size(); ++f) {
      std::ofstream out(dir / ("fold_" + std::to_string(f) + "_fit" + sfx + ".txt"));
      write_fit_report(out, res.fit_reports[f]);
    }
    ErrorReport rep = make_error_report(run.method, seed, res.results, run.ate_unpruned, src.truth, data, cfg.true_ate);
    write_tidy_errors(tidy, rep, res.results, src.truth, data);
    json js = report_to_json(rep);
    if (res.prune_threshold) js["prune_threshold"] = *res.prune_threshold;
    summary[run.method] = js;
    reports.push_back(std::move(rep));
  }
  write_text(dir / "errors.csv", tidy.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return reports;
}

}  // namespace

HonestResult baseline_estimate(const Dataset& data, int eta, std::size_t k, EstimatorKind kind, std::uint64_t seed) {
  HonestOptions o;
  o.eta = eta;
  o.k = k;
  o.kind = kind;
  o.seed = seed;
  o.fixed_metric = StretchMetric::uniform(data.schema(), 1.0);
  return honest_estimate(data, o);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "config.json", config_to_json(cfg).dump(2) + "\n");

  const std::size_t n = cfg.seeds.size();
  std::vector<std::vector<ErrorReport>> per_seed(n);
  std::vector<std::optional<SeedFailure>> failed(n);
  parallel_for(n, [&](std::size_t s) {
    try {
      per_seed[s] = run_seed(cfg, cfg.seeds[s]);
    } catch (const Error& e) {
      failed[s] = SeedFailure{cfg.seeds[s], e.what(), static_cast<int>(e.exit_code())};
    } catch (const std::exception& e) {
      failed[s] = SeedFailure{cfg.seeds[s], e.what(), static_cast<int>(ExitCode::kNumerical)};
    }
  });

  ExperimentReport rep;
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& r : per_seed[s]) rep.reports.push_back(std::move(r));
    if (failed[s]) rep.failures.push_back(*failed[s]);
  }
  rep.aggregate = rep.reports.empty() ? json::object() : aggregate_reports(rep.reports);
  json out{{"aggregate", rep.aggregate}, {"failures", json::array()}};
  for (const auto& f : rep.failures) out["failures"].push_back({{"seed", f.seed}, {"error", f.message}});
  write_text(cfg.output_dir / "aggregate.json", out.dump(2) + "\n");
  return rep;
}

ExperimentReport evaluate_directory(const fs::path& output_dir) {
  const ExperimentConfig cfg = config_from_json(json::parse(read_text(output_dir / "config.json")));
  ExperimentReport rep;
  for (auto seed : cfg.seeds) {
    const fs::path dir = output_dir / seed_dir_name(seed);
    if (!fs::exists(dir / "summary.json")) {
      rep.failures.push_back({seed, "no results for seed", static_cast<int>(ExitCode::kData)});
      continue;
    }
    const CovariateSchema schema = schema_from_json(json::parse(read_text(dir / "schema.json")));
    const Dataset data = load_csv(dir / "data.csv", schema);
    std::optional<SimTruth> truth;
    if (fs::exists(dir / "truth.csv")) {
      std::ifstream in(dir / "truth.csv", std::ios::binary);
      const auto rows = read_truth_csv(in);
      SimTruth t;
      t.y0.resize(data.size());
      t.y1.resize(data.size());
      t.true_cate.resize(data.size());
      for (const auto& row : rows) {
        const auto i = data.index_of(row.unit_id);
        t.y0[i] = row.y0;
        t.y1[i] = row.y1;
        t.true_cate[i] = row.true_cate;
      }
      truth = std::move(t);
    }
    for (const std::string method : {"malts", "baseline"}) {
      const std::string sfx = suffix(method);
      if (!fs::exists(dir / ("results" + sfx + ".csv"))) continue;
      std::ifstream in(dir / ("results" + sfx + ".csv"), std::ios::binary);
      const auto results = read_results_csv(in);
      double ate_unpruned = ate(results, true);
      if (fs::exists(dir / ("results_unpruned" + sfx + ".csv"))) {
        std::ifstream u(dir / ("results_unpruned" + sfx + ".csv"), std::ios::binary);
        ate_unpruned = ate(read_results_csv(u), true);
      }
      rep.reports.push_back(make_error_report(method, seed, results, ate_unpruned, truth, data, cfg.true_ate));
    }
  }
  rep.aggregate = rep.reports.empty() ? json::object() : aggregate_reports(rep.reports);
  return rep;
}

// ---------------------------------------------------------------------------
// inspection

std::string inspect_group(const Dataset& data, std::span<const CATEResult> results,
                          std::span<const UnifiedGroup> groups, const std::string& query_id) {
  const std::size_t qi = data.index_of(query_id);
  const auto res = std::find_if(results.begin(), results.end(), [&](const auto& r) { return r.unit_id == query_id; });
  const auto grp = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.unit_id == query_id; });
  if (res == results.end() || grp == groups.end()) throw LookupError("no matched group for unit '" + query_id + "'");

  const auto& schema = data.schema();
  std::vector<std::pair<std::string, int>> members(grp->member_weights.begin(), grp->member_weights.end());
  std::stable_sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Unit-id", "Treated"};
  for (const auto& n : schema.names) head.push_back(n);
  head.push_back(schema.outcome_name);
  head.push_back("Count");
  rows.push_back(head);

  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };
  auto row_for = [&](const Unit& u, const std::string& label, const std::string& count) {
    std::vector<std::string> r{label, fmt(u.treated() ? 1.0 : 0.0)};
    std::size_t ic = 0, id = 0;
    for (auto kind : schema.kinds) {
      r.push_back(kind == CovariateKind::kContinuous ? fmt(u.x_cont[ic++])
                                                     : std::to_string(u.x_disc[id++]));
    }
    r.push_back(fmt(u.y));
    r.push_back(count);
    return r;
  };
  rows.push_back(row_for(data[qi], "Query: " + query_id, "-"));
  for (const auto& [id, count] : members) rows.push_back(row_for(data[data.index_of(id)], id, std::to_string(count)));

  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());

  std::ostringstream os;
  os << "Matched group for unit " << query_id << ": cate_hat=" << fmt(res->cate_hat) << " n_folds=" << res->n_folds
     << " mean_diameter=" << fmt(res->mean_diameter) << (res->pruned ? " [pruned]" : "") << '\n';
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  const std::string rule(total, '-');
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r <= 2) os << rule << '\n';
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c == 0) os << std::left;
      else os << std::right;
      os << std::setw(static_cast<int>(width[c])) << rows[r][c] << "  ";
    }
    os << '\n';
  }
  os << rule << '\n';
  return os.str();
}

std::string inspect_seed_directory(const fs::path& seed_dir, const std::string& query_id, const std::string& method) {
  const CovariateSchema schema = schema_from_json(json::parse(read_text(seed_dir / "schema.json")));
  const Dataset data = load_csv(seed_dir / "data.csv", schema);
  const std::string sfx = suffix(method);
  std::ifstream rin(seed_dir / ("results" + sfx + ".csv"), std::ios::binary);
  if (!rin) throw LookupError("no results" + sfx + ".csv in '" + seed_dir.string() + "'");
  const auto results = read_results_csv(rin);
  std::ifstream gin(seed_dir / ("groups" + sfx + ".csv"), std::ios::binary);
  if (!gin) throw LookupError("no groups" + sfx + ".csv in '" + seed_dir.string() + "'");
  const auto groups = read_groups_csv(gin);
  return inspect_group(data, results, groups, query_id);
}

}  // namespace malts

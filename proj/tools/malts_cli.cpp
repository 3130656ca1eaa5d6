#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "malts/errors.hpp"
#include "malts/harness.hpp"
#include "malts/matching.hpp"
#include "malts/metric.hpp"
#include "malts/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace malts;

namespace {

// Values given on the command line; unset ones leave the config file alone.
struct Overrides {
  std::string config;
  std::string data, schema, output_dir, dgp, optimizer, estimator, cate_mode, prune;
  std::optional<std::size_t> n, k;
  std::optional<int> eta, max_iters;
  std::optional<double> reg_c, tol, init_weight, true_ate, sigma_t, gamma_y, gamma_t;
  std::vector<std::uint64_t> seeds;
  bool standardize = false, baseline = false;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentConfig build_config(const Overrides& o) {
  json j = o.config.empty() ? json::object() : read_json(o.config);
  auto dgp = [&]() -> json& {
    if (!j.contains("dgp")) j["dgp"] = json::object();
    return j["dgp"];
  };
  if (!o.dgp.empty()) {
    dgp()["kind"] = o.dgp;
    j.erase("input_csv");
  }
  if (o.n) dgp()["n"] = *o.n;
  if (o.sigma_t) dgp()["sigma_t"] = *o.sigma_t;
  if (o.gamma_y) dgp()["gamma_y"] = *o.gamma_y;
  if (o.gamma_t) dgp()["gamma_t"] = *o.gamma_t;
  if (!o.data.empty()) {
    j["input_csv"] = o.data;
    j.erase("dgp");
  }
  if (!o.schema.empty()) j["schema"] = read_json(o.schema);
  if (!o.output_dir.empty()) j["output_dir"] = o.output_dir;
  if (o.eta) j["eta"] = *o.eta;
  if (o.k) j["k"] = *o.k;
  if (o.max_iters) j["max_iters"] = *o.max_iters;
  if (o.reg_c) j["reg_c"] = *o.reg_c;
  if (o.tol) j["tol"] = *o.tol;
  if (o.init_weight) j["init_weight"] = *o.init_weight;
  if (o.true_ate) j["true_ate"] = *o.true_ate;
  if (!o.optimizer.empty()) j["optimizer"] = o.optimizer;
  if (!o.estimator.empty()) j["estimator"] = o.estimator;
  if (!o.cate_mode.empty()) j["cate_mode"] = o.cate_mode;
  if (!o.prune.empty()) {
    char* end = nullptr;
    const double v = std::strtod(o.prune.c_str(), &end);
    j["prune"] = end && *end == '\0' && end != o.prune.c_str() ? json(v) : json(o.prune);
  }
  if (!o.seeds.empty()) j["seeds"] = o.seeds;
  if (o.standardize) j["standardize"] = true;
  if (o.baseline) j["baseline"] = true;
  return config_from_json(j);
}

SourceData load_source(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.dgp && cfg.input_csv) throw ConfigError("give either a dgp or an input CSV, not both");
  if (cfg.dgp) return simulate(*cfg.dgp, seed);
  if (!cfg.input_csv) throw ConfigError("no data source: pass --data or --dgp");
  if (cfg.schema.names.empty()) throw ConfigError("--schema is required with --data");
  return {load_csv(*cfg.input_csv, cfg.schema), std::nullopt};
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

void add_data_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--data", o.data, "input CSV");
  app->add_option("--schema", o.schema, "schema JSON for --data");
  app->add_option("--dgp", o.dgp, "quadratic | friedman | sensitivity | overlap");
  app->add_option("--n", o.n, "units to simulate");
  app->add_option("--sigma-t", o.sigma_t, "treatment noise for the overlap generator");
  app->add_option("--gamma-y", o.gamma_y, "outcome confounding for the sensitivity generator");
  app->add_option("--gamma-t", o.gamma_t, "treatment confounding for the sensitivity generator");
  app->add_option("--seeds", o.seeds, "seeds (the first one is used by single-run commands)");
}

void add_training_options(CLI::App* app, Overrides& o) {
  app->add_option("--reg-c", o.reg_c, "Frobenius penalty");
  app->add_option("--max-iters", o.max_iters, "optimizer iteration budget");
  app->add_option("--tol", o.tol, "relative objective tolerance");
  app->add_option("--init-weight", o.init_weight, "starting weight");
  app->add_option("--optimizer", o.optimizer, "nelder_mead | coordinate_descent");
}

void print_metric(const StretchMetric& m, const CovariateSchema& s) { write_metric(std::cout, m, s); }

int cmd_simulate(const Overrides& o) {
  const ExperimentConfig cfg = build_config(o);
  if (!cfg.dgp) throw ConfigError("simulate needs a dgp");
  const fs::path dir = cfg.output_dir;
  for (auto seed : cfg.seeds) {
    const SourceData src = simulate(*cfg.dgp, seed);
    const fs::path d = cfg.seeds.size() == 1 ? dir : dir / ("seed_" + std::to_string(seed));
    fs::create_directories(d);
    save_csv(d / "data.csv", src.data);
    write_file(d / "schema.json", schema_to_json(src.data.schema()).dump(2) + "\n");
    std::ostringstream truth;
    write_truth_csv(truth, src.data, *src.truth);
    write_file(d / "truth.csv", truth.str());
    std::cout << d.string() << ": " << src.data.size() << " units, " << src.data.count(Arm::kTreated)
              << " treated\n";
  }
  return 0;
}

int cmd_train(const Overrides& o, const std::string& metric_out) {
  const ExperimentConfig cfg = build_config(o);
  const std::uint64_t seed = cfg.seeds.front();
  SourceData src = load_source(cfg, seed);
  TrainingConfig tc = cfg.training;
  tc.seed = seed;
  std::vector<std::size_t> all(src.data.size());
  std::iota(all.begin(), all.end(), 0);
  const Dataset data = cfg.standardize ? Standardization::fit(src.data, all).apply(src.data) : src.data;
  const FitResult fit = fit_metric(data, tc);
  std::ostringstream report;
  write_fit_report(report, fit.report);
  if (metric_out.empty()) {
    print_metric(fit.metric, data.schema());
    std::cout << report.str();
  } else {
    std::ostringstream m;
    write_metric(m, fit.metric, data.schema());
    write_file(metric_out, m.str());
    fs::path rep = metric_out;
    rep.replace_extension(".fit.txt");
    write_file(rep, report.str());
    std::cout << "metric written to " << metric_out << ", fit report to " << rep.string() << '\n';
  }
  return 0;
}

int cmd_match(const Overrides& o, const std::string& metric_path, const std::string& query) {
  const ExperimentConfig cfg = build_config(o);
  const std::uint64_t seed = cfg.seeds.front();
  const SourceData src = load_source(cfg, seed);
  const Dataset& data = src.data;
  const StretchMetric m =
      metric_path.empty() ? StretchMetric::uniform(data.schema(), 1.0) : load_metric(metric_path, data.schema());
  const Unit& q = data[data.index_of(query)];
  const MatchedGroup g = matched_group(m, q, data, cfg.k, seed);
  const double cate = cate_for_unit(q, g, data, cfg.kind, cfg.mode);
  std::cout << "query " << q.id << " (" << to_string(q.t) << ", y=" << q.y << ")  cate_hat=" << cate
            << "  diameter=" << g.diameter << '\n';
  std::cout << std::left << std::setw(10) << "arm" << std::setw(16) << "unit_id" << std::setw(14) << "distance"
            << "outcome\n";
  for (Arm arm : {Arm::kTreated, Arm::kControl})
    for (const auto& n : g.members(arm)) {
      std::cout << std::left << std::setw(10) << to_string(arm) << std::setw(16) << n.id << std::setw(14)
                << n.distance << data[n.index].y << '\n';
    }
  return 0;
}

void print_reports(const ExperimentReport& r) {
  for (const auto& rep : r.reports) std::cout << report_to_json(rep).dump() << '\n';
  for (const auto& f : r.failures) std::cout << "seed " << f.seed << " failed: " << f.message << '\n';
  std::cout << "aggregate: " << r.aggregate.dump(2) << '\n';
}

int failure_code(const ExperimentReport& r) {
  if (r.reports.empty() && !r.failures.empty()) return r.failures.front().exit_code;
  return 0;
}

int cmd_estimate(const Overrides& o) {
  const ExperimentConfig cfg = build_config(o);
  const ExperimentReport r = run_experiment(cfg);
  print_reports(r);
  std::cout << "artifacts in " << cfg.output_dir.string() << '\n';
  return failure_code(r);
}

int cmd_evaluate(const std::string& dir) {
  const ExperimentReport r = evaluate_directory(dir);
  print_reports(r);
  return failure_code(r);
}

int cmd_inspect(const std::string& dir, const std::string& unit, const std::string& method) {
  std::cout << inspect_seed_directory(dir, unit, method);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matching with learned stretch metrics: simulate, train, match, estimate, evaluate, inspect.\n"
               "Worker threads: MALTS_NUM_WORKERS (default: hardware concurrency)."};
  app.require_subcommand(1);
  Overrides o;
  std::string metric_out, metric_in, query, dir, unit, method = "malts";

  auto* sim = app.add_subcommand("simulate", "generate a dataset with ground truth");
  add_data_options(sim, o);
  sim->add_option("--out-dir", o.output_dir, "output directory");

  auto* train = app.add_subcommand("train", "fit a stretch metric on a whole dataset");
  add_data_options(train, o);
  add_training_options(train, o);
  train->add_flag("--standardize", o.standardize, "z-score continuous covariates first");
  train->add_option("--out", metric_out, "metric file (fit report goes next to it)");

  auto* match = app.add_subcommand("match", "matched group of one unit");
  add_data_options(match, o);
  match->add_option("--metric", metric_in, "metric file (default: all weights 1)");
  match->add_option("--query", query, "unit id")->required();
  match->add_option("--k", o.k, "neighbours per arm");
  match->add_option("--estimator", o.estimator, "mean | softmax_weighted_mean | linear_regression");
  match->add_option("--cate-mode", o.cate_mode, "both_arms | own_outcome");

  auto* est = app.add_subcommand("estimate", "honest cross-fitted CATE estimation over seeds");
  add_data_options(est, o);
  add_training_options(est, o);
  est->add_option("--out-dir", o.output_dir, "output directory");
  est->add_option("--eta", o.eta, "folds");
  est->add_option("--k", o.k, "neighbours per arm");
  est->add_option("--estimator", o.estimator, "mean | softmax_weighted_mean | linear_regression");
  est->add_option("--cate-mode", o.cate_mode, "both_arms | own_outcome");
  est->add_option("--prune", o.prune, "off | auto | <diameter threshold>");
  est->add_option("--true-ate", o.true_ate, "known ATE for CSV input");
  est->add_flag("--standardize", o.standardize, "z-score continuous covariates per training fold");
  est->add_flag("--baseline", o.baseline, "also run the unit-weight matcher");

  auto* eval = app.add_subcommand("evaluate", "recompute reports from an output directory");
  eval->add_option("dir", dir, "output directory of estimate")->required();

  auto* insp = app.add_subcommand("inspect", "print the unified matched group of a unit");
  insp->add_option("dir", dir, "seed directory, e.g. out/seed_0")->required();
  insp->add_option("unit", unit, "unit id")->required();
  insp->add_option("--method", method, "malts | baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*train) return cmd_train(o, metric_out);
    if (*match) return cmd_match(o, metric_in, query);
    if (*est) return cmd_estimate(o);
    if (*eval) return cmd_evaluate(dir);
    if (*insp) return cmd_inspect(dir, unit, method);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kConfig);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kNumerical);
  }
  return 0;
}

#include "malts/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "malts/errors.hpp"
#include "malts/optimizer.hpp"
#include "malts/parallel.hpp"

namespace malts {

namespace {

// Arms at least this large evaluate their rows on worker threads.
constexpr std::size_t kParallelRows = 256;

std::vector<Unit> arm_units(const Dataset& data, Arm arm) {
  std::vector<Unit> out;
  for (const auto& u : data.units())
    if (u.t == arm) out.push_back(u);
  return out;
}

void check_shape(const StretchMetric& m, const Unit& u) {
  if (u.x_cont.size() != m.cont_weights().size() || u.x_disc.size() != m.disc_weights().size()) {
    throw SchemaError("unit '" + u.id + "' does not match the metric dimensions");
  }
}

// Full symmetric distance matrix, row-major.
std::vector<double> distance_matrix(const StretchMetric& m, std::span<const Unit> units) {
  const std::size_t n = units.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = i + 1; l < n; ++l) {
      const double v = distance_unchecked(m, units[i], units[l]);
      d[i * n + l] = v;
      d[l * n + i] = v;
    }
  }
  return d;
}

void for_rows(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n >= kParallelRows) {
    parallel_for(n, body);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

}  // namespace

const char* to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::kNelderMead ? "nelder_mead" : "coordinate_descent";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "nelder_mead") return OptimizerKind::kNelderMead;
  if (name == "coordinate_descent") return OptimizerKind::kCoordinateDescent;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void TrainingConfig::validate() const {
  if (!(reg_c >= 0.0) || !std::isfinite(reg_c)) throw ConfigError("reg_c must be finite and >= 0");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(init_weight >= 0.0) || !std::isfinite(init_weight)) {
    throw ConfigError("init_weight must be finite and >= 0");
  }
}

std::vector<double> soft_weights(const StretchMetric& m, const Unit& query, std::span<const Unit> pool) {
  if (pool.empty()) throw InfeasibleError("soft_weights: empty pool");
  check_shape(m, query);
  std::vector<double> d(pool.size());
  for (std::size_t l = 0; l < pool.size(); ++l) {
    check_shape(m, pool[l]);
    d[l] = distance_unchecked(m, query, pool[l]);
    if (!std::isfinite(d[l])) throw NumericalError("soft_weights: non-finite distance to '" + pool[l].id + "'");
  }
  const double dmin = *std::min_element(d.begin(), d.end());
  double total = 0.0;
  for (auto& v : d) {
    v = std::exp(dmin - v);
    total += v;
  }
  for (auto& v : d) v /= total;
  return d;
}

double arm_loss(const StretchMetric& m, std::span<const Unit> units) {
  const std::size_t n = units.size();
  if (n < 2) throw InfeasibleError("arm_loss: need at least 2 units, have " + std::to_string(n));
  for (const auto& u : units) check_shape(m, u);
  const auto d = distance_matrix(m, units);
  std::vector<double> partial(n, 0.0);
  std::vector<int> bad(n, 0);
  for_rows(n, [&](std::size_t i) {
    const double* row = d.data() + i * n;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l)
      if (l != i) dmin = std::min(dmin, row[l]);
    if (!std::isfinite(dmin)) {
      bad[i] = 1;
      return;
    }
    double total = 0.0, weighted = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      const double w = std::exp(dmin - row[l]);
      total += w;
      weighted += w * units[l].y;
    }
    partial[i] = std::fabs(units[i].y - weighted / total);
  });
  if (std::find(bad.begin(), bad.end(), 1) != bad.end()) throw NumericalError("arm_loss: non-finite distance");
  double loss = 0.0;
  for (double v : partial) loss += v;  // index order keeps the sum reproducible
  return loss;
}

double objective(const StretchMetric& m, const Dataset& train, const TrainingConfig& cfg) {
  m.check_schema(train.schema());
  const auto controls = arm_units(train, Arm::kControl);
  const auto treated = arm_units(train, Arm::kTreated);
  return cfg.reg_c * frobenius_norm(m) + arm_loss(m, controls) + arm_loss(m, treated);
}

double empirical_pair_loss(const StretchMetric& m, std::span<const Unit> units) {
  const std::size_t n = units.size();
  if (n == 0) throw InfeasibleError("empirical_pair_loss: no units");
  for (const auto& u : units) check_shape(m, u);
  std::vector<double> partial(n, 0.0);
  for_rows(n, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      s += std::exp(-distance_unchecked(m, units[i], units[l])) * std::fabs(units[i].y - units[l].y);
    }
    partial[i] = s;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

double generalization_gap(const StretchMetric& m, const Dataset& train, const Dataset& heldout) {
  double gap = 0.0;
  for (Arm arm : {Arm::kControl, Arm::kTreated}) {
    const auto a = arm_units(train, arm);
    const auto b = arm_units(heldout, arm);
    gap += std::fabs(empirical_pair_loss(m, a) - empirical_pair_loss(m, b));
  }
  return gap;
}

FitResult fit_metric(const Dataset& train, const TrainingConfig& cfg) {
  cfg.validate();
  train.require_arms(2, "fit_metric");
  const auto& schema = train.schema();
  const std::size_t nc = schema.num_continuous();
  const auto controls = arm_units(train, Arm::kControl);
  const auto treated = arm_units(train, Arm::kTreated);

  auto evaluate = [&](const StretchMetric& m) {
    return cfg.reg_c * frobenius_norm(m) + arm_loss(m, controls) + arm_loss(m, treated);
  };
  auto to_metric = [&](std::span<const double> v) {
    std::vector<double> w(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) w[j] = v[j] * v[j];
    return StretchMetric::from_flat(w, nc);
  };

  FitReport report;
  report.zero_objective = evaluate(StretchMetric::uniform(schema, 0.0));
  const StretchMetric init = StretchMetric::uniform(schema, cfg.init_weight);
  report.initial_objective = evaluate(init);

  std::vector<double> v0(init.size(), std::sqrt(cfg.init_weight));
  OptimizerOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.seed = cfg.seed;
  const ObjectiveFn f = [&](std::span<const double> v) { return evaluate(to_metric(v)); };
  const OptimizerResult r = cfg.optimizer == OptimizerKind::kNelderMead ? nelder_mead(f, v0, opts)
                                                                       : coordinate_descent(f, v0, opts);

  FitResult out{to_metric(r.x), report};
  out.report.final_objective = r.value;
  out.report.iterations = r.iterations;
  out.report.evaluations = r.evaluations;
  out.report.converged = r.converged;

  // Anything no worse than the zero metric lies inside ||M||_F <= g0 / c.
  if (cfg.reg_c > 0.0 && r.value <= report.zero_objective) {
    const double bound = report.zero_objective / cfg.reg_c;
    if (frobenius_norm(out.metric) > bound * (1.0 + 1e-12)) {
      throw NumericalError("fit_metric: retained metric violates the Frobenius search bound");
    }
  }
  return out;
}

void write_fit_report(std::ostream& out, const FitReport& report) {
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "final_objective = " << report.final_objective << '\n'
      << "iterations = " << report.iterations << '\n'
      << "converged = " << (report.converged ? "true" : "false") << '\n'
      << "initial_objective = " << report.initial_objective << '\n'
      << "zero_objective = " << report.zero_objective << '\n'
      << "evaluations = " << report.evaluations << '\n';
  out.precision(old_prec);
}

}  // namespace malts

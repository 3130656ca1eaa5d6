#include "malts/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "malts/csv.hpp"
#include "malts/errors.hpp"
#include "malts/random.hpp"

namespace malts {

const char* to_string(CovariateKind kind) noexcept {
  return kind == CovariateKind::kContinuous ? "continuous" : "discrete";
}

const char* to_string(Arm arm) noexcept {
  return arm == Arm::kTreated ? "treated" : "control";
}

CovariateSchema CovariateSchema::from_lists(const std::vector<std::string>& continuous,
                                            const std::vector<std::string>& discrete,
                                            std::string outcome, std::string treatment) {
  CovariateSchema s;
  for (const auto& n : continuous) {
    s.names.push_back(n);
    s.kinds.push_back(CovariateKind::kContinuous);
  }
  for (const auto& n : discrete) {
    s.names.push_back(n);
    s.kinds.push_back(CovariateKind::kDiscrete);
  }
  s.outcome_name = std::move(outcome);
  s.treatment_name = std::move(treatment);
  s.validate();
  return s;
}

void CovariateSchema::validate() const {
  if (names.size() != kinds.size()) {
    throw SchemaError("schema: " + std::to_string(names.size()) + " names but " +
                      std::to_string(kinds.size()) + " kinds");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw SchemaError("schema: empty covariate name");
    if (!seen.insert(n).second) throw SchemaError("schema: duplicate covariate '" + n + "'");
  }
  if (outcome_name.empty() || treatment_name.empty()) {
    throw SchemaError("schema: outcome and treatment names are required");
  }
  if (outcome_name == treatment_name) {
    throw SchemaError("schema: outcome and treatment share the name '" + outcome_name + "'");
  }
  if (seen.contains(outcome_name)) {
    throw SchemaError("schema: outcome '" + outcome_name + "' is also a covariate");
  }
  if (seen.contains(treatment_name)) {
    throw SchemaError("schema: treatment '" + treatment_name + "' is also a covariate");
  }
}

std::size_t CovariateSchema::num_continuous() const noexcept {
  return static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), CovariateKind::kContinuous));
}

std::size_t CovariateSchema::num_discrete() const noexcept {
  return kinds.size() - num_continuous();
}

std::vector<std::string> CovariateSchema::continuous_names() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (kinds[j] == CovariateKind::kContinuous) out.push_back(names[j]);
  return out;
}

std::vector<std::string> CovariateSchema::discrete_names() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (kinds[j] == CovariateKind::kDiscrete) out.push_back(names[j]);
  return out;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(CovariateSchema schema, std::vector<Unit> units)
    : schema_(std::move(schema)), units_(std::move(units)) {
  schema_.validate();
  const auto nc = schema_.num_continuous();
  const auto nd = schema_.num_discrete();
  by_id_.reserve(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const Unit& u = units_[i];
    if (u.x_cont.size() != nc || u.x_disc.size() != nd) {
      throw SchemaError("unit '" + u.id + "': expected " + std::to_string(nc) + " continuous and " +
                        std::to_string(nd) + " discrete covariates");
    }
    if (!std::isfinite(u.y)) throw SchemaError("unit '" + u.id + "': outcome is not finite");
    for (double v : u.x_cont) {
      if (!std::isfinite(v)) throw SchemaError("unit '" + u.id + "': covariate is not finite");
    }
    if (u.t != Arm::kControl && u.t != Arm::kTreated) {
      throw SchemaError("unit '" + u.id + "': treatment must be 0 or 1");
    }
    if (!by_id_.emplace(u.id, i).second) throw SchemaError("duplicate unit id '" + u.id + "'");
  }
}

std::size_t Dataset::count(Arm arm) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(units_.begin(), units_.end(), [arm](const Unit& u) { return u.t == arm; }));
}

std::vector<std::size_t> Dataset::indices(Arm arm) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < units_.size(); ++i)
    if (units_[i].t == arm) out.push_back(i);
  return out;
}

std::size_t Dataset::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw LookupError("unknown unit id '" + id + "'");
  return it->second;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Unit> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(units_.at(i));
  return Dataset(schema_, std::move(picked));
}

void Dataset::require_arms(std::size_t per_arm, const std::string& context) const {
  for (Arm arm : {Arm::kControl, Arm::kTreated}) {
    if (count(arm) < per_arm) {
      throw InfeasibleError(context + ": need at least " + std::to_string(per_arm) + " " +
                            to_string(arm) + " unit(s), have " + std::to_string(count(arm)));
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

using csv::parse_double;
using csv::parse_integer;
using csv::read_record;
using csv::trim;

Dataset read_csv(std::istream& in, const CovariateSchema& schema) {
  schema.validate();
  std::vector<std::string> header;
  if (!read_record(in, header) || (header.size() == 1 && trim(header[0]).empty())) {
    throw ParseError("empty dataset: no header row");
  }
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  auto column = [&](const std::string& name) { return csv::column(header, name); };
  std::vector<std::size_t> cov_col;
  for (const auto& n : schema.names) cov_col.push_back(column(n));
  const std::size_t y_col = column(schema.outcome_name);
  const std::size_t t_col = column(schema.treatment_name);
  const auto id_it = std::find(header.begin(), header.end(), std::string("id"));
  const bool has_id = id_it != header.end();
  const std::size_t id_col = has_id ? static_cast<std::size_t>(id_it - header.begin()) : 0;

  std::vector<Unit> units;
  std::vector<std::string> fields;
  std::size_t row = 0;  // 1-based data row number in messages
  while (read_record(in, fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    ++row;
    const std::string where = "row " + std::to_string(row);
    if (fields.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    Unit u;
    u.id = has_id ? fields[id_col] : std::to_string(row - 1);
    if (u.id.empty()) throw ParseError(where + ": empty id");
    for (std::size_t j = 0; j < schema.names.size(); ++j) {
      const std::string& cell = fields[cov_col[j]];
      if (cell.empty()) throw ParseError(where + ": missing value for '" + schema.names[j] + "'");
      if (schema.kinds[j] == CovariateKind::kContinuous) {
        double v;
        if (!parse_double(cell, v)) {
          throw ParseError(where + ": non-numeric value '" + cell + "' for '" + schema.names[j] + "'");
        }
        u.x_cont.push_back(v);
      } else {
        std::int64_t v;
        if (!parse_integer(cell, v)) {
          throw ParseError(where + ": non-integer category '" + cell + "' for '" + schema.names[j] + "'");
        }
        u.x_disc.push_back(v);
      }
    }
    if (!parse_double(fields[y_col], u.y)) {
      throw ParseError(where + ": non-numeric outcome '" + fields[y_col] + "'");
    }
    std::int64_t t;
    if (!parse_integer(fields[t_col], t) || (t != 0 && t != 1)) {
      throw ParseError(where + ": treatment must be 0 or 1, got '" + fields[t_col] + "'");
    }
    u.t = t == 1 ? Arm::kTreated : Arm::kControl;
    units.push_back(std::move(u));
  }
  if (units.empty()) throw ParseError("empty dataset: no data rows");
  return Dataset(schema, std::move(units));
}

Dataset load_csv(const std::filesystem::path& path, const CovariateSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& data) {
  const auto& s = data.schema();
  out << "id";
  for (const auto& n : s.names) out << ',' << csv::quote(n);
  out << ',' << csv::quote(s.outcome_name) << ',' << csv::quote(s.treatment_name) << '\n';
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (const Unit& u : data.units()) {
    out << csv::quote(u.id);
    std::size_t ic = 0, id = 0;
    for (auto kind : s.kinds) {
      out << ',';
      if (kind == CovariateKind::kContinuous) {
        out << u.x_cont[ic++];
      } else {
        out << u.x_disc[id++];
      }
    }
    out << ',' << u.y << ',' << static_cast<int>(u.t) << '\n';
  }
  out.precision(old_prec);
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  write_csv(out, data);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> FoldPlan::members(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::complement(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

FoldPlan stratified_folds(const Dataset& data, int eta, std::uint64_t seed) {
  if (eta < 2) throw ConfigError("fold count must be at least 2, got " + std::to_string(eta));
  data.require_arms(static_cast<std::size_t>(eta), "stratified folds");

  FoldPlan plan;
  plan.eta = eta;
  plan.assignment.assign(data.size(), -1);
  int next = 0;
  for (Arm arm : {Arm::kControl, Arm::kTreated}) {
    auto idx = data.indices(arm);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(arm) + 1));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) {
      plan.assignment[i] = next;
      next = (next + 1) % eta;
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------

Standardization Standardization::fit(const Dataset& data, std::span<const std::size_t> indices) {
  const auto nc = data.schema().num_continuous();
  Standardization s;
  s.mean.assign(nc, 0.0);
  s.scale.assign(nc, 1.0);
  if (indices.empty()) return s;
  const double n = static_cast<double>(indices.size());
  for (auto i : indices)
    for (std::size_t j = 0; j < nc; ++j) s.mean[j] += data[i].x_cont[j];
  for (auto& m : s.mean) m /= n;
  std::vector<double> ss(nc, 0.0);
  for (auto i : indices)
    for (std::size_t j = 0; j < nc; ++j) {
      const double d = data[i].x_cont[j] - s.mean[j];
      ss[j] += d * d;
    }
  for (std::size_t j = 0; j < nc; ++j) {
    const double sd = indices.size() > 1 ? std::sqrt(ss[j] / (n - 1.0)) : 0.0;
    s.scale[j] = sd > 0.0 ? sd : 1.0;  // constant columns are only centred
  }
  return s;
}

Unit Standardization::apply(const Unit& u) const {
  Unit out = u;
  for (std::size_t j = 0; j < out.x_cont.size(); ++j) out.x_cont[j] = (out.x_cont[j] - mean[j]) / scale[j];
  return out;
}

Dataset Standardization::apply(const Dataset& data) const {
  std::vector<Unit> units;
  units.reserve(data.size());
  for (const auto& u : data.units()) units.push_back(apply(u));
  return Dataset(data.schema(), std::move(units));
}

}  // namespace malts

#include "malts/metric.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "malts/errors.hpp"

namespace malts {

namespace {

void check_weights(const std::vector<double>& w, const char* block) {
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!std::isfinite(w[j]) || w[j] < 0.0) {
      throw ConfigError(std::string("metric: ") + block + " weight " + std::to_string(j) +
                        " must be finite and nonnegative");
    }
  }
}

}  // namespace

StretchMetric::StretchMetric(std::vector<double> cont_weights, std::vector<double> disc_weights)
    : cont_(std::move(cont_weights)), disc_(std::move(disc_weights)) {
  check_weights(cont_, "continuous");
  check_weights(disc_, "discrete");
}

StretchMetric StretchMetric::uniform(const CovariateSchema& schema, double w) {
  return StretchMetric(std::vector<double>(schema.num_continuous(), w),
                       std::vector<double>(schema.num_discrete(), w));
}

std::vector<double> StretchMetric::flat() const {
  std::vector<double> out(cont_);
  out.insert(out.end(), disc_.begin(), disc_.end());
  return out;
}

StretchMetric StretchMetric::from_flat(std::span<const double> w, std::size_t num_continuous) {
  if (num_continuous > w.size()) throw ConfigError("metric: flat vector shorter than continuous block");
  return StretchMetric(std::vector<double>(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(num_continuous)),
                       std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(num_continuous), w.end()));
}

StretchMetric StretchMetric::scaled(double lambda) const {
  auto c = cont_;
  auto d = disc_;
  for (auto& v : c) v *= lambda;
  for (auto& v : d) v *= lambda;
  return StretchMetric(std::move(c), std::move(d));
}

void StretchMetric::check_schema(const CovariateSchema& schema) const {
  if (cont_.size() != schema.num_continuous() || disc_.size() != schema.num_discrete()) {
    throw SchemaError("metric has " + std::to_string(cont_.size()) + "+" + std::to_string(disc_.size()) +
                      " weights, schema has " + std::to_string(schema.num_continuous()) + "+" +
                      std::to_string(schema.num_discrete()) + " covariates");
  }
}

double distance_unchecked(const StretchMetric& m, const Unit& a, const Unit& b) noexcept {
  const auto& wc = m.cont_weights();
  double ss = 0.0;
  for (std::size_t j = 0; j < wc.size(); ++j) {
    const double d = wc[j] * (a.x_cont[j] - b.x_cont[j]);
    ss += d * d;
  }
  double hamming = 0.0;
  const auto& wd = m.disc_weights();
  for (std::size_t j = 0; j < wd.size(); ++j) {
    if (a.x_disc[j] != b.x_disc[j]) hamming += wd[j];
  }
  return std::sqrt(ss) + hamming;
}

double distance(const StretchMetric& m, const Unit& a, const Unit& b) {
  if (a.x_cont.size() != m.cont_weights().size() || b.x_cont.size() != m.cont_weights().size() ||
      a.x_disc.size() != m.disc_weights().size() || b.x_disc.size() != m.disc_weights().size()) {
    throw SchemaError("distance: unit dimensions do not match the metric");
  }
  return distance_unchecked(m, a, b);
}

double frobenius_norm(const StretchMetric& m) noexcept {
  double ss = 0.0;
  for (double w : m.cont_weights()) ss += w * w;
  for (double w : m.disc_weights()) ss += w * w;
  return std::sqrt(ss);
}

StretchMetric average(std::span<const StretchMetric> metrics) {
  if (metrics.empty()) throw ConfigError("average: no metrics");
  auto c = metrics.front().cont_weights();
  auto d = metrics.front().disc_weights();
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    const auto& m = metrics[i];
    if (m.cont_weights().size() != c.size() || m.disc_weights().size() != d.size()) {
      throw SchemaError("average: metrics have different shapes");
    }
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += m.cont_weights()[j];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] += m.disc_weights()[j];
  }
  const double n = static_cast<double>(metrics.size());
  for (auto& v : c) v /= n;
  for (auto& v : d) v /= n;
  return StretchMetric(std::move(c), std::move(d));
}

// ---------------------------------------------------------------------------

void write_metric(std::ostream& out, const StretchMetric& m, const CovariateSchema& schema) {
  m.check_schema(schema);
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  std::size_t ic = 0, id = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const bool cont = schema.kinds[j] == CovariateKind::kContinuous;
    const double w = cont ? m.cont_weights()[ic++] : m.disc_weights()[id++];
    out << "# kind: " << to_string(schema.kinds[j]) << '\n' << schema.names[j] << " = " << w << '\n';
  }
  out.precision(old_prec);
}

StretchMetric read_metric(std::istream& in, const CovariateSchema& schema) {
  std::map<std::string, double> weights;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("metric line " + std::to_string(lineno) + ": expected 'name = weight'");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string name = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), w);
    if (name.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
      throw ParseError("metric line " + std::to_string(lineno) + ": malformed entry '" + line + "'");
    }
    if (!weights.emplace(name, w).second) {
      throw ParseError("metric line " + std::to_string(lineno) + ": duplicate covariate '" + name + "'");
    }
  }
  std::vector<double> c, d;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto it = weights.find(schema.names[j]);
    if (it == weights.end()) throw ParseError("metric: missing covariate '" + schema.names[j] + "'");
    (schema.kinds[j] == CovariateKind::kContinuous ? c : d).push_back(it->second);
    weights.erase(it);
  }
  if (!weights.empty()) throw ParseError("metric: unknown covariate '" + weights.begin()->first + "'");
  try {
    return StretchMetric(std::move(c), std::move(d));
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

void save_metric(const std::filesystem::path& path, const StretchMetric& m, const CovariateSchema& schema) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  write_metric(out, m, schema);
}

StretchMetric load_metric(const std::filesystem::path& path, const CovariateSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_metric(in, schema);
}

}  // namespace malts

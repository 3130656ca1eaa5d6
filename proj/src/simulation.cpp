#include "malts/simulation.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "malts/csv.hpp"
#include "malts/errors.hpp"
#include "malts/random.hpp"

namespace malts {

double expit(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------

void QuadraticParams::validate() const {
  if (n == 0) throw ConfigError("quadratic: n must be >= 1");
  if (k_c > p_c) throw ConfigError("quadratic: k_c exceeds p_c");
  if (k_d > p_d) throw ConfigError("quadratic: k_d exceeds p_d");
  if (p_c + p_d < 2) throw ConfigError("quadratic: treatment rule needs at least 2 covariates");
  if (!(sigma_cov > 0.0) || !(sigma_t > 0.0)) throw ConfigError("quadratic: sigma values must be > 0");
  if (!(sigma_outcome >= 0.0)) throw ConfigError("quadratic: sigma_outcome must be >= 0");
  if (!(phi_bern >= 0.0 && phi_bern <= 1.0)) throw ConfigError("quadratic: phi_bern must lie in [0, 1]");
}

std::vector<double> relevant_covariates(const Unit& u, const QuadraticParams& params) {
  std::vector<double> x;
  x.reserve(params.k_c + params.k_d);
  for (std::size_t j = 0; j < params.k_c; ++j) x.push_back(u.x_cont[j]);
  for (std::size_t j = 0; j < params.k_d; ++j) x.push_back(static_cast<double>(u.x_disc[j]));
  return x;
}

QuadraticSim quadratic_dgp(const QuadraticParams& params) {
  params.validate();
  Rng rng(derive_seed(params.seed, 0x51));
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::bernoulli_distribution sign_coin(0.5);
  std::bernoulli_distribution bern(params.phi_bern);

  const std::size_t k = params.k_c + params.k_d;
  QuadraticSim sim;
  sim.alpha.resize(k);
  sim.beta.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double s = sign_coin(rng) ? 1.0 : -1.0;
    sim.alpha[j] = 10.0 * s + 3.0 * std_normal(rng);
  }
  for (std::size_t j = 0; j < k; ++j) sim.beta[j] = 1.0 + 0.5 * std_normal(rng);
  const std::size_t quad_terms = params.terms == QuadraticTerms::kAllRelevant ? k : (k > 0 ? k - 1 : 0);

  std::vector<std::string> cont_names, disc_names;
  for (std::size_t j = 0; j < params.p_c; ++j) cont_names.push_back("c" + std::to_string(j));
  for (std::size_t j = 0; j < params.p_d; ++j) disc_names.push_back("d" + std::to_string(j));
  auto schema = CovariateSchema::from_lists(cont_names, disc_names);

  const double cov_sd = std::sqrt(params.sigma_cov);
  std::vector<Unit> units(params.n);
  auto& truth = sim.truth;
  truth.y0.resize(params.n);
  truth.y1.resize(params.n);
  truth.true_cate.resize(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    Unit& u = units[i];
    u.id = std::to_string(i);
    u.x_cont.resize(params.p_c);
    u.x_disc.resize(params.p_d);
    for (auto& v : u.x_cont) v = params.mu + cov_sd * std_normal(rng);
    for (auto& v : u.x_disc) v = bern(rng) ? 1 : 0;
    const double eps_t = params.sigma_t * std_normal(rng);
    const double eps0 = params.sigma_outcome * std_normal(rng);
    const double eps1 = params.sigma_outcome * std_normal(rng);

    const auto x = relevant_covariates(u, params);
    double lin_a = 0.0, lin_b = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      lin_a += sim.alpha[j] * x[j];
      lin_b += sim.beta[j] * x[j];
    }
    double quad = 0.0;
    for (std::size_t j = 0; j < quad_terms; ++j)
      for (std::size_t jj = 0; jj < quad_terms; ++jj) quad += x[j] * x[jj];

    // First two covariates in schema order (continuous before discrete).
    auto full = [&](std::size_t j) {
      return j < params.p_c ? u.x_cont[j] : static_cast<double>(u.x_disc[j - params.p_c]);
    };
    u.t = expit(full(0) + full(1) - params.c_shift + eps_t) > 0.5 ? Arm::kTreated : Arm::kControl;

    truth.true_cate[i] = lin_b + params.gamma * quad;
    truth.y0[i] = lin_a + eps0;
    truth.y1[i] = lin_a + lin_b + params.gamma * quad + eps1;
    u.y = u.treated() ? truth.y1[i] : truth.y0[i];
  }
  sim.data = Dataset(std::move(schema), std::move(units));
  return sim;
}

// ---------------------------------------------------------------------------

double friedman_baseline(std::span<const double> x) noexcept {
  const double pi = std::numbers::pi;
  return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
}

double friedman_effect(std::span<const double> x) noexcept {
  return x[2] * std::cos(std::numbers::pi * x[0] * x[1]);
}

Simulated friedman_dgp(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("friedman: n must be >= 1");
  Rng rng(derive_seed(seed, 0xF1));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  std::vector<std::string> names;
  for (int j = 1; j <= 10; ++j) names.push_back("x" + std::to_string(j));
  auto schema = CovariateSchema::from_lists(names, {});

  Simulated sim;
  auto& truth = sim.truth;
  truth.y0.resize(n);
  truth.y1.resize(n);
  truth.true_cate.resize(n);
  std::vector<Unit> units(n);
  for (std::size_t i = 0; i < n; ++i) {
    Unit& u = units[i];
    u.id = std::to_string(i);
    u.x_cont.resize(10);
    for (auto& v : u.x_cont) v = unif(rng);
    const double eps_t = 20.0 * std_normal(rng);
    const double eps0 = std_normal(rng);
    const double eps1 = std_normal(rng);
    const double base = friedman_baseline(u.x_cont);
    truth.true_cate[i] = friedman_effect(u.x_cont);
    truth.y0[i] = base + eps0;
    truth.y1[i] = base + truth.true_cate[i] + eps1;
    u.t = expit(u.x_cont[0] + u.x_cont[1] - 0.5 + eps_t) > 0.5 ? Arm::kTreated : Arm::kControl;
    u.y = u.treated() ? truth.y1[i] : truth.y0[i];
  }
  sim.data = Dataset(std::move(schema), std::move(units));
  return sim;
}

// ---------------------------------------------------------------------------

Simulated sensitivity_dgp(std::size_t n, double gamma_y, double gamma_t, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sensitivity: n must be >= 1");
  Rng rng(derive_seed(seed, 0x5E));
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto schema = CovariateSchema::from_lists({"x1", "x2"}, {});

  Simulated sim;
  auto& truth = sim.truth;
  truth.y0.resize(n);
  truth.y1.resize(n);
  truth.true_cate.assign(n, 1.0);
  truth.u.resize(n);
  std::vector<Unit> units(n);
  for (std::size_t i = 0; i < n; ++i) {
    Unit& unit = units[i];
    unit.id = std::to_string(i);
    const double x1 = std_normal(rng);
    const double x2 = std_normal(rng);
    const double u = std_normal(rng);
    const double eps0 = std_normal(rng);
    const double eps1 = std_normal(rng);
    const double draw = unif(rng);
    unit.x_cont = {x1, x2};
    truth.u[i] = u;
    truth.y0[i] = x1 + x2 + gamma_y * u + eps0;
    truth.y1[i] = x1 + x2 + gamma_y * u + 1.0 + eps1;
    unit.t = draw < expit(x1 + x2 + gamma_t * u - 2.0) ? Arm::kTreated : Arm::kControl;
    unit.y = unit.treated() ? truth.y1[i] : truth.y0[i];
  }
  sim.data = Dataset(std::move(schema), std::move(units));
  return sim;
}

// ---------------------------------------------------------------------------

double standardized_mean_difference(std::span<const double> values, std::span<const Arm> arms) {
  double sum[2] = {0.0, 0.0}, sq[2] = {0.0, 0.0};
  double cnt[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int a = static_cast<int>(arms[i]);
    sum[a] += values[i];
    cnt[a] += 1.0;
  }
  if (cnt[0] < 2.0 || cnt[1] < 2.0) return std::numeric_limits<double>::quiet_NaN();
  const double m0 = sum[0] / cnt[0], m1 = sum[1] / cnt[1];
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int a = static_cast<int>(arms[i]);
    const double d = values[i] - (a ? m1 : m0);
    sq[a] += d * d;
  }
  const double v0 = sq[0] / (cnt[0] - 1.0), v1 = sq[1] / (cnt[1] - 1.0);
  return (m1 - m0) / std::sqrt((v0 + v1) / 2.0);
}

OverlapSim overlap_dgp(std::size_t n, double sigma_t, std::uint64_t seed) {
  if (!(sigma_t > 0.0)) throw ConfigError("overlap: sigma_t must be > 0");
  QuadraticParams p;
  p.n = n;
  p.p_c = p.k_c = 2;
  p.sigma_t = sigma_t;
  p.seed = seed;
  auto q = quadratic_dgp(p);
  std::vector<double> s;
  std::vector<Arm> arms;
  for (const auto& u : q.data.units()) {
    s.push_back(u.x_cont[0] + u.x_cont[1]);
    arms.push_back(u.t);
  }
  OverlapSim out{std::move(q.data), std::move(q.truth), 0.0};
  out.smd = standardized_mean_difference(s, arms);
  return out;
}

// ---------------------------------------------------------------------------

void write_truth_csv(std::ostream& out, const Dataset& data, const SimTruth& truth) {
  const bool has_u = !truth.u.empty();
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "unit_id,y0,y1,true_cate" << (has_u ? ",u" : "") << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << csv::quote(data[i].id) << ',' << truth.y0[i] << ',' << truth.y1[i] << ',' << truth.true_cate[i];
    if (has_u) out << ',' << truth.u[i];
    out << '\n';
  }
  out.precision(old_prec);
}

std::vector<TruthRow> read_truth_csv(std::istream& in) {
  std::vector<std::string> header;
  if (!csv::read_record(in, header)) throw ParseError("truth: empty file");
  for (auto& h : header) h = csv::trim(h);
  const auto c_id = csv::column(header, "unit_id");
  const auto c_y0 = csv::column(header, "y0");
  const auto c_y1 = csv::column(header, "y1");
  const auto c_tau = csv::column(header, "true_cate");
  std::vector<TruthRow> rows;
  std::vector<std::string> f;
  std::size_t row = 0;
  while (csv::read_record(in, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    ++row;
    TruthRow r;
    r.unit_id = f.size() == header.size() ? f[c_id] : std::string();
    if (f.size() != header.size() || !csv::parse_double(f[c_y0], r.y0) || !csv::parse_double(f[c_y1], r.y1) ||
        !csv::parse_double(f[c_tau], r.true_cate)) {
      throw ParseError("truth row " + std::to_string(row) + ": malformed record");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace malts

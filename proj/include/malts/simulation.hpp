#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "malts/data.hpp"

namespace malts {

// Potential outcomes behind a simulated dataset, in dataset order.
struct SimTruth {
  std::vector<double> y0;
  std::vector<double> y1;
  std::vector<double> true_cate;  // noiseless E[y1 - y0 | x]
  std::vector<double> u;          // hidden confounder (sensitivity DGP only)
};

struct Simulated {
  Dataset data;
  SimTruth truth;
};

// Logistic function; stable for large |z|.
double expit(double z) noexcept;

// Which relevant covariates enter the quadratic effect term.
enum class QuadraticTerms {
  kAllRelevant,  // every ordered pair of the k relevant covariates
  kExcludeLast,  // pairs over the first k - 1 relevant covariates
};

// Linear baseline with linear + quadratic effect. Continuous covariates are
// named c0.., discrete ones d0..; the first k_c / k_d of each kind are the
// relevant ones. Normal parameters are standard deviations except
// sigma_cov, which is the covariate variance.
struct QuadraticParams {
  std::size_t n = 2500;
  std::size_t p_c = 10, k_c = 5;
  std::size_t p_d = 0, k_d = 0;
  double mu = 1.0;
  double sigma_cov = 1.5;  // variance of each continuous covariate
  double phi_bern = 0.5;
  double sigma_t = 20.0;   // treatment assignment noise
  double c_shift = 2.0;
  double gamma = 1.0;
  double sigma_outcome = 1.0;
  QuadraticTerms terms = QuadraticTerms::kAllRelevant;
  std::uint64_t seed = 0;

  void validate() const;
};

struct QuadraticSim {
  Dataset data;
  SimTruth truth;
  // Coefficients over the relevant covariates, continuous first.
  std::vector<double> alpha;
  std::vector<double> beta;
};

QuadraticSim quadratic_dgp(const QuadraticParams& params);

// Relevant covariate values of a unit (continuous then discrete as 0/1
// numbers) for a quadratic dataset.
std::vector<double> relevant_covariates(const Unit& u, const QuadraticParams& params);

// Friedman's function with a cos(pi x1 x2) x3 treatment effect; covariates
// x1..x10 iid U(0,1).
Simulated friedman_dgp(std::size_t n, std::uint64_t seed);
double friedman_baseline(std::span<const double> x) noexcept;  // x = (x1, ..., x10)
double friedman_effect(std::span<const double> x) noexcept;

// Constant unit effect 1 with a hidden confounder u that shifts the outcome
// by gamma_y * u and the treatment log-odds by gamma_t * u. Only x1 and x2
// are emitted; u is kept in SimTruth.
Simulated sensitivity_dgp(std::size_t n, double gamma_y, double gamma_t, std::uint64_t seed);

struct OverlapSim {
  Dataset data;
  SimTruth truth;
  double smd = 0.0;  // standardized difference of means of x0 + x1 between arms
};

// Quadratic DGP with two relevant continuous covariates and treatment noise
// sigma_t; smaller sigma_t means less overlap.
OverlapSim overlap_dgp(std::size_t n, double sigma_t, std::uint64_t seed);

// (mean_T - mean_C) / sqrt((var_T + var_C) / 2).
double standardized_mean_difference(std::span<const double> values, std::span<const Arm> arms);

// unit_id,y0,y1,true_cate[,u]
void write_truth_csv(std::ostream& out, const Dataset& data, const SimTruth& truth);
// Reads the truth file written above; rows follow the file order.
struct TruthRow {
  std::string unit_id;
  double y0 = 0.0, y1 = 0.0, true_cate = 0.0;
};
std::vector<TruthRow> read_truth_csv(std::istream& in);

}  // namespace malts

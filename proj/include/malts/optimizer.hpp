#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace malts {

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct OptimizerOptions {
  int max_iters = 2000;       // total iterations across restarts (sweeps for coordinate descent)
  double tol = 1e-6;          // relative objective tolerance
  double initial_step = 0.5;  // simplex edge / coordinate step relative to max(|x_i|, 0.1)
  std::uint64_t seed = 0;
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Thrown (as NumericalError) when the objective returns a non-finite value;
// the message lists the offending point.
[[noreturn]] void throw_non_finite(std::span<const double> x, double value);

// Nelder-Mead with dimension-adaptive coefficients. Each pass runs until the
// simplex value spread falls below tol; the search then restarts from the
// best vertex with a freshly oriented simplex and stops once a whole pass
// improves the objective by less than tol * max(1, |f|).
OptimizerResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0, const OptimizerOptions& opts);

// Compass search, one coordinate at a time in a seeded order. Steps expand on
// success and halve on failure; converged once a sweep improves by less than
// tol * max(1, |f|) and every step has shrunk below 1e-6 of its start.
OptimizerResult coordinate_descent(const ObjectiveFn& f, std::vector<double> x0, const OptimizerOptions& opts);

}  // namespace malts

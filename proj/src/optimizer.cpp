#include "malts/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "malts/errors.hpp"
#include "malts/random.hpp"

namespace malts {

void throw_non_finite(std::span<const double> x, double value) {
  std::ostringstream os;
  os << "objective evaluated to " << value << " at weights (";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  throw NumericalError(os.str());
}

namespace {

class Counted {
 public:
  explicit Counted(const ObjectiveFn& f) : f_(f) {}
  double operator()(std::span<const double> x) {
    ++evaluations;
    const double v = f_(x);
    if (!std::isfinite(v)) throw_non_finite(x, v);
    return v;
  }
  int evaluations = 0;

 private:
  const ObjectiveFn& f_;
};

double step_for(double x, double rel) { return rel * std::max(std::fabs(x), 0.1); }

bool small_change(double before, double after, double tol) {
  return before - after < tol * std::max(1.0, std::fabs(after));
}

}  // namespace

OptimizerResult nelder_mead(const ObjectiveFn& objective, std::vector<double> x0, const OptimizerOptions& opts) {
  Counted f(objective);
  const std::size_t n = x0.size();
  OptimizerResult res;
  res.x = x0;
  res.value = f(x0);
  if (n == 0) {
    res.converged = true;
    return res;
  }

  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 1.0 / (2.0 * dn);
  const double delta = n > 1 ? 1.0 - 1.0 / dn : 0.5;

  Rng rng(derive_seed(opts.seed, 0x4e4d));
  std::bernoulli_distribution coin(0.5);

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(n));
  std::vector<double> values(n + 1);
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  int iters = 0;
  while (iters < opts.max_iters) {
    const double pass_start = res.value;
    simplex[0] = res.x;
    values[0] = res.value;
    for (std::size_t i = 0; i < n; ++i) {
      simplex[i + 1] = res.x;
      const double s = step_for(res.x[i], opts.initial_step);
      simplex[i + 1][i] += coin(rng) ? s : -s;
      values[i + 1] = f(simplex[i + 1]);
    }

    bool settled = false;
    while (iters < opts.max_iters) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[n - 1];
      if (values[worst] - values[best] <= opts.tol * std::max(1.0, std::fabs(values[best]))) {
        settled = true;
        break;
      }
      ++iters;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v <= n; ++v) {
        if (v == worst) continue;
        for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i];
      }
      for (auto& c : centroid) c /= dn;

      for (std::size_t i = 0; i < n; ++i) xr[i] = centroid[i] + alpha * (centroid[i] - simplex[worst][i]);
      const double fr = f(xr);
      if (fr < values[best]) {
        for (std::size_t i = 0; i < n; ++i) xe[i] = centroid[i] + beta * (xr[i] - centroid[i]);
        const double fe = f(xe);
        if (fe < fr) {
          simplex[worst] = xe;
          values[worst] = fe;
        } else {
          simplex[worst] = xr;
          values[worst] = fr;
        }
        continue;
      }
      if (fr < values[second]) {
        simplex[worst] = xr;
        values[worst] = fr;
        continue;
      }
      const bool outside = fr < values[worst];
      for (std::size_t i = 0; i < n; ++i) {
        xc[i] = outside ? centroid[i] + gamma * (xr[i] - centroid[i])
                        : centroid[i] - gamma * (centroid[i] - simplex[worst][i]);
      }
      const double fc = f(xc);
      if (fc < (outside ? fr : values[worst])) {
        simplex[worst] = xc;
        values[worst] = fc;
        continue;
      }
      for (std::size_t v = 0; v <= n; ++v) {
        if (v == best) continue;
        for (std::size_t i = 0; i < n; ++i) {
          simplex[v][i] = simplex[best][i] + delta * (simplex[v][i] - simplex[best][i]);
        }
        values[v] = f(simplex[v]);
      }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto b = static_cast<std::size_t>(best_it - values.begin());
    if (values[b] < res.value) {
      res.value = values[b];
      res.x = simplex[b];
    }
    if (settled && small_change(pass_start, res.value, opts.tol)) {
      res.converged = true;
      break;
    }
  }
  res.iterations = iters;
  res.evaluations = f.evaluations;
  return res;
}

OptimizerResult coordinate_descent(const ObjectiveFn& objective, std::vector<double> x0,
                                   const OptimizerOptions& opts) {
  Counted f(objective);
  const std::size_t n = x0.size();
  OptimizerResult res;
  res.x = std::move(x0);
  res.value = f(res.x);
  if (n == 0) {
    res.converged = true;
    return res;
  }
  std::vector<double> step(n), start(n);
  for (std::size_t i = 0; i < n; ++i) start[i] = step[i] = step_for(res.x[i], opts.initial_step);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(opts.seed, 0x4344));

  std::vector<double> trial;
  int sweeps = 0;
  while (sweeps < opts.max_iters) {
    ++sweeps;
    const double sweep_start = res.value;
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      bool moved = false;
      for (double sign : {1.0, -1.0}) {
        trial = res.x;
        trial[i] += sign * step[i];
        const double v = f(trial);
        if (v < res.value) {
          res.value = v;
          res.x = trial;
          moved = true;
          break;
        }
      }
      step[i] = moved ? std::min(step[i] * 2.0, start[i] * 16.0) : step[i] * 0.5;
    }
    bool steps_small = true;
    for (std::size_t i = 0; i < n; ++i) steps_small = steps_small && step[i] <= 1e-6 * start[i];
    if (small_change(sweep_start, res.value, opts.tol) && steps_small) {
      res.converged = true;
      break;
    }
  }
  res.iterations = sweeps;
  res.evaluations = f.evaluations;
  return res;
}

}  // namespace malts

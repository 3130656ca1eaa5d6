#pragma once

#include <span>
#include <vector>

namespace malts {

// Quantile with linear interpolation between order statistics
// (h = (n - 1) q, the "type 7" convention). Throws ConfigError when empty or
// q is outside [0, 1].
double quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);
double median(std::span<const double> values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> values);

}  // namespace malts

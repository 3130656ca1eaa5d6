#pragma once

#include <string>
#include <vector>

#include "malts/data.hpp"

namespace malts::testing {

inline Unit cont_unit(std::string id, std::vector<double> x, double y, Arm t) {
  return Unit{std::move(id), std::move(x), {}, y, t};
}

inline Unit disc_unit(std::string id, std::vector<std::int64_t> x, double y, Arm t) {
  return Unit{std::move(id), {}, std::move(x), y, t};
}

inline CovariateSchema cont_schema(std::size_t p) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  return CovariateSchema::from_lists(names, {});
}

// n_c controls then n_t treated with one covariate x = i and outcome y = i.
inline Dataset line_dataset(std::size_t n_c, std::size_t n_t) {
  std::vector<Unit> units;
  for (std::size_t i = 0; i < n_c + n_t; ++i) {
    const double v = static_cast<double>(i);
    units.push_back(cont_unit("u" + std::to_string(i), {v}, v, i < n_c ? Arm::kControl : Arm::kTreated));
  }
  return Dataset(cont_schema(1), std::move(units));
}

}  // namespace malts::testing

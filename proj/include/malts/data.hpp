#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace malts {

enum class CovariateKind { kContinuous, kDiscrete };

enum class Arm : int { kControl = 0, kTreated = 1 };

constexpr Arm other(Arm a) noexcept {
  return a == Arm::kTreated ? Arm::kControl : Arm::kTreated;
}

const char* to_string(CovariateKind kind) noexcept;
const char* to_string(Arm arm) noexcept;

// Column layout of a dataset. Continuous and discrete covariates may be
// interleaved in `names`; a unit stores each kind in schema order.
struct CovariateSchema {
  std::vector<std::string> names;
  std::vector<CovariateKind> kinds;
  std::string outcome_name = "y";
  std::string treatment_name = "t";

  static CovariateSchema from_lists(const std::vector<std::string>& continuous,
                                    const std::vector<std::string>& discrete,
                                    std::string outcome = "y", std::string treatment = "t");

  // Throws SchemaError on duplicate names, length mismatch, or an
  // outcome/treatment column that collides with a covariate.
  void validate() const;

  std::size_t size() const noexcept { return names.size(); }
  std::size_t num_continuous() const noexcept;
  std::size_t num_discrete() const noexcept;
  std::vector<std::string> continuous_names() const;
  std::vector<std::string> discrete_names() const;

  bool operator==(const CovariateSchema&) const = default;
};

struct Unit {
  std::string id;
  std::vector<double> x_cont;
  std::vector<std::int64_t> x_disc;
  double y = 0.0;
  Arm t = Arm::kControl;

  bool treated() const noexcept { return t == Arm::kTreated; }
  bool operator==(const Unit&) const = default;
};

// Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  // Validates arity, finiteness and id uniqueness; throws SchemaError.
  Dataset(CovariateSchema schema, std::vector<Unit> units);

  const CovariateSchema& schema() const noexcept { return schema_; }
  const std::vector<Unit>& units() const noexcept { return units_; }
  std::size_t size() const noexcept { return units_.size(); }
  bool empty() const noexcept { return units_.empty(); }
  const Unit& operator[](std::size_t i) const { return units_[i]; }

  std::size_t count(Arm arm) const noexcept;
  std::vector<std::size_t> indices(Arm arm) const;
  // Index of the unit with this id; throws LookupError.
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const noexcept { return by_id_.contains(id); }

  Dataset subset(std::span<const std::size_t> indices) const;

  // Throws InfeasibleError unless both arms have at least `per_arm` units.
  void require_arms(std::size_t per_arm, const std::string& context) const;

 private:
  CovariateSchema schema_;
  std::vector<Unit> units_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

Dataset read_csv(std::istream& in, const CovariateSchema& schema);
Dataset load_csv(const std::filesystem::path& path, const CovariateSchema& schema);
// Columns: id, covariates in schema order, outcome, treatment. Reals are
// written with max_digits10 so a reload is exact.
void write_csv(std::ostream& out, const Dataset& data);
void save_csv(const std::filesystem::path& path, const Dataset& data);

struct FoldPlan {
  int eta = 0;
  std::vector<int> assignment;  // per unit, in dataset order

  std::vector<std::size_t> members(int fold) const;
  std::vector<std::size_t> complement(int fold) const;
};

// Shuffles each arm with the seed and deals it round-robin into folds; the
// treated deal continues where the control deal stopped so fold sizes stay
// within one of each other.
FoldPlan stratified_folds(const Dataset& data, int eta, std::uint64_t seed);

// Z-score transform of continuous covariates.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardization fit(const Dataset& data, std::span<const std::size_t> indices);
  Unit apply(const Unit& u) const;
  Dataset apply(const Dataset& data) const;
};

}  // namespace malts

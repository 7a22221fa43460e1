#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shiftscope/data_model.hpp"

namespace shiftscope {

/// A nonnegative basis function of one feature (labels do not enter the
/// built-in bases; coefficients are per label instead).
struct BasisFunction {
  enum class Kind { kLinear, kIndicator };

  Kind kind = Kind::kIndicator;
  int feature = 0;
  // kIndicator: the level matched. kLinear: unused.
  int level = 1;
  // kLinear: phi(x) = max(0, x - offset).
  double offset = 0.0;

  double operator()(std::span<const double> row) const {
    const double v = row[static_cast<std::size_t>(feature)];
    if (kind == Kind::kIndicator) return static_cast<int>(v) == level ? 1.0 : 0.0;
    return v > offset ? v - offset : 0.0;
  }
};

class BasisSet {
 public:
  BasisSet(std::vector<BasisFunction> functions, std::size_t feature_count);

  std::size_t size() const { return functions_.size(); }
  std::size_t feature_count() const { return feature_count_; }
  const BasisFunction& operator[](std::size_t k) const { return functions_[k]; }
  /// Indices k of bases reading feature i.
  const std::vector<int>& group(std::size_t i) const { return groups_[i]; }
  const std::vector<std::vector<int>>& groups() const { return groups_; }

  /// phi_1..phi_K at one row.
  void evaluate(std::span<const double> row, std::span<double> out) const;

 private:
  std::vector<BasisFunction> functions_;
  std::size_t feature_count_;
  std::vector<std::vector<int>> groups_;
};

/// Indicators 1{x_i = c} for every level of discrete columns and a shifted
/// linear basis x_i - min + 1 for continuous columns, min taken over
/// `fit_sample` (0 when no sample is given).
BasisSet default_basis(const FeatureSchema& schema, const TabularDataset* fit_sample = nullptr);

}  // namespace shiftscope

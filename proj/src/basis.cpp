#include "shiftscope/basis.hpp"

#include <algorithm>
#include <limits>

#include "shiftscope/error.hpp"

namespace shiftscope {

BasisSet::BasisSet(std::vector<BasisFunction> functions, std::size_t feature_count)
    : functions_(std::move(functions)), feature_count_(feature_count), groups_(feature_count) {
  if (functions_.empty()) throw Error(ErrorCode::kInvalidInput, "basis set is empty");
  for (std::size_t k = 0; k < functions_.size(); ++k) {
    const int f = functions_[k].feature;
    if (f < 0 || static_cast<std::size_t>(f) >= feature_count_) {
      throw Error(ErrorCode::kInvalidInput, "basis reads feature out of range");
    }
    groups_[f].push_back(static_cast<int>(k));
  }
}

void BasisSet::evaluate(std::span<const double> row, std::span<double> out) const {
  for (std::size_t k = 0; k < functions_.size(); ++k) out[k] = functions_[k](row);
}

BasisSet default_basis(const FeatureSchema& schema, const TabularDataset* fit_sample) {
  schema.validate();
  std::vector<BasisFunction> fns;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& col = schema[i];
    const int f = static_cast<int>(i);
    if (col.is_discrete()) {
      for (int c = 1; c <= col.cardinality; ++c) {
        fns.push_back({BasisFunction::Kind::kIndicator, f, c, 0.0});
      }
    } else {
      double lo = 0.0;
      if (fit_sample != nullptr && fit_sample->size() > 0) {
        lo = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < fit_sample->size(); ++r) lo = std::min(lo, fit_sample->at(r, i));
      }
      fns.push_back({BasisFunction::Kind::kLinear, f, 0, lo - 1.0});
    }
  }
  return BasisSet(std::move(fns), schema.size());
}

}  // namespace shiftscope

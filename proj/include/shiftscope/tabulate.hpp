#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "shiftscope/data_model.hpp"

namespace shiftscope {

enum class AxisKind { kFeature, kPrediction, kLabel };

struct Axis {
  AxisKind kind = AxisKind::kFeature;
  int feature = -1;

  static Axis of_feature(int i) { return {AxisKind::kFeature, i}; }
  static Axis prediction() { return {AxisKind::kPrediction, -1}; }
  static Axis label() { return {AxisKind::kLabel, -1}; }

  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Dense tables above this many cells are refused.
inline constexpr std::size_t kMaxPmfCells = 10'000'000;

/// Probability mass table over a list of discrete axes. Stored as weighted
/// counts over a total so marginalization is exact for integer counts; the
/// first axis varies slowest. Cell coordinates are 1-based levels.
class EmpiricalPmf {
 public:
  EmpiricalPmf() = default;
  EmpiricalPmf(std::vector<Axis> axes, std::vector<int> cardinalities, std::vector<double> counts,
               double total);

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<int>& cardinalities() const { return cards_; }
  const std::vector<double>& counts() const { return counts_; }
  double total() const { return total_; }
  // Rows the table was estimated from; equals total() unless smoothing or
  // population masses were used.
  std::size_t sample_count() const { return sample_count_; }
  void set_sample_count(std::size_t n) { sample_count_ = n; }

  std::size_t cell_count() const { return counts_.size(); }
  double mass(std::size_t flat) const { return total_ > 0 ? counts_[flat] / total_ : 0.0; }
  double mass(std::span<const int> levels) const { return mass(flat_index(levels)); }
  std::vector<double> masses() const;

  std::size_t flat_index(std::span<const int> levels) const;
  /// Inverse of flat_index, writing 1-based levels into `levels`.
  void unflatten(std::size_t flat, std::span<int> levels) const;

  /// Position of `axis` in axes(), or -1.
  int find_axis(const Axis& axis) const;

  /// Sums out every axis not in `keep`; the result follows the order of `keep`.
  EmpiricalPmf marginalize(std::span<const Axis> keep) const;

 private:
  std::vector<Axis> axes_;
  std::vector<int> cards_;
  std::vector<std::size_t> strides_;
  std::vector<double> counts_;
  double total_ = 0.0;
  std::size_t sample_count_ = 0;
};

/// Counts rows per cell. `smoothing_alpha` adds a pseudo-count to every cell.
/// Throws kMissingAxis when LABEL/PREDICTION is requested but absent, or a
/// requested feature column is continuous; kTableTooLarge above kMaxPmfCells.
EmpiricalPmf estimate_pmf(const TabularDataset& ds, std::span<const Axis> axes,
                          double smoothing_alpha = 0.0);

/// Product of cardinalities with the overflow guard applied.
std::size_t checked_cell_count(std::span<const int> cardinalities);

/// Equal-frequency bin edges for continuous columns.
struct Discretizer {
  FeatureSchema input_schema;
  int bins = 5;
  // Column index -> strictly increasing interior edges (bins - 1 of them).
  std::map<int, std::vector<double>> edges;

  FeatureSchema output_schema() const;
  int bin_of(int column, double value) const;
};

Discretizer fit_discretizer(const TabularDataset& ds, int bins = 5);
TabularDataset apply_discretizer(const Discretizer& disc, const TabularDataset& ds);

/// Supplies marginal tables either by counting a dataset or by summing an
/// exact joint table (population mode). Non-owning: the dataset or joint must
/// outlive the source.
class MarginalSource {
 public:
  static MarginalSource from_dataset(const TabularDataset& ds);
  /// `joint` must carry one axis per feature (in order), plus PREDICTION and
  /// optionally LABEL.
  static MarginalSource from_joint(const EmpiricalPmf& joint, FeatureSchema schema);

  EmpiricalPmf marginal(std::span<const Axis> axes) const;
  const FeatureSchema& schema() const { return schema_; }
  std::size_t feature_count() const { return schema_.size(); }
  int label_cardinality() const { return schema_.label_cardinality; }
  bool is_population() const { return joint_ != nullptr; }

 private:
  const TabularDataset* data_ = nullptr;
  const EmpiricalPmf* joint_ = nullptr;
  FeatureSchema schema_;
};

}  // namespace shiftscope

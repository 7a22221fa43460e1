#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shiftscope {

enum class ColumnKind { kDiscrete, kContinuous };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kDiscrete;
  // Number of levels for discrete columns; 0 for continuous ones.
  int cardinality = 0;
  // Optional text labels for levels 1..cardinality, used by file ingestion.
  std::vector<std::string> categories;

  static Column discrete(std::string name, int cardinality);
  static Column continuous(std::string name);

  bool is_discrete() const { return kind == ColumnKind::kDiscrete; }
};

/// Ordered feature columns plus the label alphabet {1..L}.
struct FeatureSchema {
  std::vector<Column> columns;
  int label_cardinality = 2;
  std::string label_name = "label";
  std::vector<std::string> label_categories;

  std::size_t size() const { return columns.size(); }
  const Column& operator[](std::size_t i) const { return columns[i]; }
  bool all_discrete() const;

  /// Throws Error(kInvalidInput) when names are empty/duplicated or a
  /// cardinality is below 2.
  void validate() const;

  /// d discrete columns x1..xd of the given cardinality.
  static FeatureSchema uniform_discrete(std::size_t d, int cardinality, int labels);
};

/// Column-kind equality: names, kinds, cardinalities and L. Category text is
/// not compared.
bool same_structure(const FeatureSchema& a, const FeatureSchema& b);

/// Row-major table of feature values with optional labels and classifier
/// output. Discrete cells hold integers in {1..cardinality}; labels and
/// predictions are in {1..L}. Treated as immutable once built.
struct TabularDataset {
  FeatureSchema schema;
  std::size_t rows = 0;
  std::vector<double> values;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<int>> predictions;
  // rows x L, row-major.
  std::optional<std::vector<double>> pred_probs;

  std::size_t size() const { return rows; }
  std::size_t width() const { return schema.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * width() + col]; }
  int level(std::size_t row, std::size_t col) const { return static_cast<int>(at(row, col)); }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * width(), width()};
  }
  std::span<const double> probs(std::size_t r) const {
    const auto L = static_cast<std::size_t>(schema.label_cardinality);
    return {pred_probs->data() + r * L, L};
  }

  bool has_labels() const { return labels.has_value(); }
  bool has_predictions() const { return predictions.has_value(); }
  bool has_probs() const { return pred_probs.has_value(); }

  /// Copy of the rows at `indices` (in that order), carrying every optional field.
  TabularDataset select_rows(std::span<const std::size_t> indices) const;
  TabularDataset without_labels() const;
};

struct Violation {
  std::optional<std::size_t> row;
  std::optional<std::size_t> column;
  std::string message;
};

/// Returns every invariant violation found; empty when the dataset is well formed.
std::vector<Violation> validate_dataset(const TabularDataset& ds);

/// Throws Error(kSchemaMismatch) naming the first differing column.
void align_schemas(const TabularDataset& source, const TabularDataset& target);
void align_schemas(const FeatureSchema& source, const FeatureSchema& target);

/// Named real-valued diagnostics attached to fits and reports.
using Diagnostics = std::map<std::string, double>;

}  // namespace shiftscope

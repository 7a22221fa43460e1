#include "shiftscope/data_model.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "shiftscope/error.hpp"

namespace shiftscope {

std::string_view error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "INVALID_INPUT";
    case ErrorCode::kSchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::kTooFewDistinctValues: return "TOO_FEW_DISTINCT_VALUES";
    case ErrorCode::kMissingAxis: return "MISSING_AXIS";
    case ErrorCode::kTableTooLarge: return "TABLE_TOO_LARGE";
    case ErrorCode::kTooManyCandidates: return "TOO_MANY_CANDIDATES";
    case ErrorCode::kSingularConfusion: return "SINGULAR_CONFUSION";
    case ErrorCode::kDegenerateKernel: return "DEGENERATE_KERNEL";
    case ErrorCode::kMissingTruth: return "MISSING_TRUTH";
    case ErrorCode::kEmptyCell: return "EMPTY_CELL";
    case ErrorCode::kRowCountMismatch: return "ROW_COUNT_MISMATCH";
    case ErrorCode::kMalformedRow: return "MALFORMED_ROW";
    case ErrorCode::kFileNotFound: return "FILE_NOT_FOUND";
    case ErrorCode::kTrainingFailure: return "TRAINING_FAILURE";
  }
  return "UNKNOWN";
}

Column Column::discrete(std::string name, int cardinality) {
  return Column{std::move(name), ColumnKind::kDiscrete, cardinality, {}};
}

Column Column::continuous(std::string name) {
  return Column{std::move(name), ColumnKind::kContinuous, 0, {}};
}

bool FeatureSchema::all_discrete() const {
  for (const auto& c : columns) {
    if (!c.is_discrete()) return false;
  }
  return true;
}

void FeatureSchema::validate() const {
  if (columns.empty()) throw Error(ErrorCode::kInvalidInput, "schema has no feature columns");
  if (label_cardinality < 2) {
    throw Error(ErrorCode::kInvalidInput, "label cardinality must be at least 2");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    if (c.name.empty()) {
      throw Error(ErrorCode::kInvalidInput, "column " + std::to_string(i) + " has an empty name");
    }
    if (!seen.insert(c.name).second) {
      throw Error(ErrorCode::kInvalidInput, "duplicate column name '" + c.name + "'");
    }
    if (c.is_discrete() && c.cardinality < 2) {
      throw Error(ErrorCode::kInvalidInput,
                  "discrete column '" + c.name + "' needs cardinality >= 2");
    }
  }
}

FeatureSchema FeatureSchema::uniform_discrete(std::size_t d, int cardinality, int labels) {
  FeatureSchema s;
  for (std::size_t i = 0; i < d; ++i) {
    s.columns.push_back(Column::discrete("x" + std::to_string(i + 1), cardinality));
  }
  s.label_cardinality = labels;
  return s;
}

namespace {

std::optional<std::string> first_difference(const FeatureSchema& a, const FeatureSchema& b) {
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.name != y.name || x.kind != y.kind || x.cardinality != y.cardinality) {
      std::ostringstream os;
      os << "column " << i << " ('" << x.name << "' vs '" << y.name << "') differs";
      if (x.name == y.name && x.kind == y.kind) {
        os << " in cardinality (" << x.cardinality << " vs " << y.cardinality << ")";
      }
      return os.str();
    }
  }
  if (a.size() != b.size()) {
    const auto& longer = a.size() > b.size() ? a : b;
    return "column " + std::to_string(common) + " ('" + longer[common].name +
           "') missing on one side";
  }
  if (a.label_cardinality != b.label_cardinality) {
    return "label cardinality differs (" + std::to_string(a.label_cardinality) + " vs " +
           std::to_string(b.label_cardinality) + ")";
  }
  return std::nullopt;
}

}  // namespace

bool same_structure(const FeatureSchema& a, const FeatureSchema& b) {
  return !first_difference(a, b).has_value();
}

void align_schemas(const FeatureSchema& source, const FeatureSchema& target) {
  if (auto diff = first_difference(source, target)) {
    throw Error(ErrorCode::kSchemaMismatch, *diff);
  }
}

void align_schemas(const TabularDataset& source, const TabularDataset& target) {
  align_schemas(source.schema, target.schema);
}

TabularDataset TabularDataset::select_rows(std::span<const std::size_t> indices) const {
  TabularDataset out;
  out.schema = schema;
  out.rows = indices.size();
  const std::size_t d = width();
  const auto L = static_cast<std::size_t>(schema.label_cardinality);
  out.values.reserve(indices.size() * d);
  for (auto i : indices) {
    auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  auto pick = [&](const std::optional<std::vector<int>>& src) -> std::optional<std::vector<int>> {
    if (!src) return std::nullopt;
    std::vector<int> v;
    v.reserve(indices.size());
    for (auto i : indices) v.push_back((*src)[i]);
    return v;
  };
  out.labels = pick(labels);
  out.predictions = pick(predictions);
  if (pred_probs) {
    std::vector<double> p;
    p.reserve(indices.size() * L);
    for (auto i : indices) {
      auto r = probs(i);
      p.insert(p.end(), r.begin(), r.end());
    }
    out.pred_probs = std::move(p);
  }
  return out;
}

TabularDataset TabularDataset::without_labels() const {
  TabularDataset out = *this;
  out.labels.reset();
  return out;
}

std::vector<Violation> validate_dataset(const TabularDataset& ds) {
  std::vector<Violation> out;
  const std::size_t d = ds.width();
  const int L = ds.schema.label_cardinality;
  if (ds.values.size() != ds.rows * d) {
    out.push_back({std::nullopt, std::nullopt,
                   "value matrix has " + std::to_string(ds.values.size()) + " cells, expected " +
                       std::to_string(ds.rows * d)});
    return out;
  }
  for (std::size_t r = 0; r < ds.rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double v = ds.at(r, c);
      const auto& col = ds.schema[c];
      if (!std::isfinite(v)) {
        out.push_back({r, c, "non-finite value"});
      } else if (col.is_discrete() &&
                 (v != std::floor(v) || v < 1 || v > col.cardinality)) {
        out.push_back({r, c,
                       "value " + std::to_string(v) + " outside {1.." +
                           std::to_string(col.cardinality) + "} for column '" + col.name + "'"});
      }
    }
  }
  auto check_classes = [&](const std::optional<std::vector<int>>& v, const char* what) {
    if (!v) return;
    if (v->size() != ds.rows) {
      out.push_back({std::nullopt, std::nullopt, std::string(what) + " length mismatch"});
      return;
    }
    for (std::size_t r = 0; r < ds.rows; ++r) {
      if ((*v)[r] < 1 || (*v)[r] > L) {
        out.push_back({r, std::nullopt,
                       std::string(what) + " " + std::to_string((*v)[r]) + " outside {1.." +
                           std::to_string(L) + "}"});
      }
    }
  };
  check_classes(ds.labels, "label");
  check_classes(ds.predictions, "prediction");
  if (ds.pred_probs) {
    if (ds.pred_probs->size() != ds.rows * static_cast<std::size_t>(L)) {
      out.push_back({std::nullopt, std::nullopt, "pred_probs shape mismatch"});
    } else {
      for (std::size_t r = 0; r < ds.rows; ++r) {
        double sum = 0.0;
        bool negative = false;
        for (double p : ds.probs(r)) {
          sum += p;
          negative = negative || p < 0.0 || !std::isfinite(p);
        }
        if (negative) out.push_back({r, std::nullopt, "negative or non-finite probability"});
        if (std::abs(sum - 1.0) > 1e-9) {
          out.push_back({r, std::nullopt, "probability row sums to " + std::to_string(sum)});
        }
      }
    }
  }
  return out;
}

}  // namespace shiftscope

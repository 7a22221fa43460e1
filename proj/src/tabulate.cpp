#include "shiftscope/tabulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "shiftscope/error.hpp"

namespace shiftscope {

std::size_t checked_cell_count(std::span<const int> cardinalities) {
  std::size_t cells = 1;
  for (int c : cardinalities) {
    if (c < 1) throw Error(ErrorCode::kInvalidInput, "axis cardinality must be positive");
    if (cells > kMaxPmfCells / static_cast<std::size_t>(c)) {
      throw Error(ErrorCode::kTableTooLarge, "probability table would exceed 10^7 cells");
    }
    cells *= static_cast<std::size_t>(c);
  }
  return cells;
}

EmpiricalPmf::EmpiricalPmf(std::vector<Axis> axes, std::vector<int> cardinalities,
                           std::vector<double> counts, double total)
    : axes_(std::move(axes)),
      cards_(std::move(cardinalities)),
      counts_(std::move(counts)),
      total_(total) {
  if (axes_.size() != cards_.size()) {
    throw Error(ErrorCode::kInvalidInput, "axis/cardinality count mismatch");
  }
  const std::size_t cells = checked_cell_count(cards_);
  if (counts_.size() != cells) {
    throw Error(ErrorCode::kInvalidInput, "pmf table size does not match its axes");
  }
  strides_.assign(cards_.size(), 1);
  for (std::size_t i = cards_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * static_cast<std::size_t>(cards_[i]);
  }
  sample_count_ = static_cast<std::size_t>(std::llround(std::max(0.0, total_)));
}

std::vector<double> EmpiricalPmf::masses() const {
  std::vector<double> out(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = mass(i);
  return out;
}

std::size_t EmpiricalPmf::flat_index(std::span<const int> levels) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    flat += static_cast<std::size_t>(levels[i] - 1) * strides_[i];
  }
  return flat;
}

void EmpiricalPmf::unflatten(std::size_t flat, std::span<int> levels) const {
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    levels[i] = static_cast<int>(flat / strides_[i]) + 1;
    flat %= strides_[i];
  }
}

int EmpiricalPmf::find_axis(const Axis& axis) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i] == axis) return static_cast<int>(i);
  }
  return -1;
}

EmpiricalPmf EmpiricalPmf::marginalize(std::span<const Axis> keep) const {
  std::vector<int> pos;
  std::vector<int> cards;
  for (const auto& a : keep) {
    const int p = find_axis(a);
    if (p < 0) throw Error(ErrorCode::kMissingAxis, "axis not present in the joint table");
    pos.push_back(p);
    cards.push_back(cards_[p]);
  }
  const std::size_t cells = checked_cell_count(cards);
  std::vector<std::size_t> out_strides(cards.size(), 1);
  for (std::size_t i = cards.size(); i-- > 1;) {
    out_strides[i - 1] = out_strides[i] * static_cast<std::size_t>(cards[i]);
  }
  std::vector<double> out(cells, 0.0);
  std::vector<int> levels(cards_.size());
  for (std::size_t flat = 0; flat < counts_.size(); ++flat) {
    if (counts_[flat] == 0.0) continue;
    unflatten(flat, levels);
    std::size_t target = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      target += static_cast<std::size_t>(levels[pos[i]] - 1) * out_strides[i];
    }
    out[target] += counts_[flat];
  }
  EmpiricalPmf result({keep.begin(), keep.end()}, std::move(cards), std::move(out), total_);
  result.set_sample_count(sample_count_);
  return result;
}

namespace {

int axis_cardinality(const FeatureSchema& schema, const Axis& a) {
  switch (a.kind) {
    case AxisKind::kFeature:
      if (a.feature < 0 || static_cast<std::size_t>(a.feature) >= schema.size()) {
        throw Error(ErrorCode::kMissingAxis, "feature axis " + std::to_string(a.feature) +
                                                 " out of range");
      }
      if (!schema[a.feature].is_discrete()) {
        throw Error(ErrorCode::kMissingAxis,
                    "column '" + schema[a.feature].name + "' is continuous; discretize first");
      }
      return schema[a.feature].cardinality;
    case AxisKind::kPrediction:
    case AxisKind::kLabel:
      return schema.label_cardinality;
  }
  return 0;
}

}  // namespace

EmpiricalPmf estimate_pmf(const TabularDataset& ds, std::span<const Axis> axes,
                          double smoothing_alpha) {
  std::vector<int> cards;
  for (const auto& a : axes) {
    if (a.kind == AxisKind::kLabel && !ds.has_labels()) {
      throw Error(ErrorCode::kMissingAxis, "LABEL axis requested but dataset has no labels");
    }
    if (a.kind == AxisKind::kPrediction && !ds.has_predictions()) {
      throw Error(ErrorCode::kMissingAxis,
                  "PREDICTION axis requested but dataset has no predictions");
    }
    cards.push_back(axis_cardinality(ds.schema, a));
  }
  const std::size_t cells = checked_cell_count(cards);
  std::vector<std::size_t> strides(cards.size(), 1);
  for (std::size_t i = cards.size(); i-- > 1;) {
    strides[i - 1] = strides[i] * static_cast<std::size_t>(cards[i]);
  }
  std::vector<double> counts(cells, smoothing_alpha);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      int level = 0;
      switch (axes[i].kind) {
        case AxisKind::kFeature: level = ds.level(r, axes[i].feature); break;
        case AxisKind::kPrediction: level = (*ds.predictions)[r]; break;
        case AxisKind::kLabel: level = (*ds.labels)[r]; break;
      }
      flat += static_cast<std::size_t>(level - 1) * strides[i];
    }
    counts[flat] += 1.0;
  }
  const double total = static_cast<double>(ds.size()) + smoothing_alpha * static_cast<double>(cells);
  EmpiricalPmf pmf({axes.begin(), axes.end()}, std::move(cards), std::move(counts), total);
  pmf.set_sample_count(ds.size());
  return pmf;
}

FeatureSchema Discretizer::output_schema() const {
  FeatureSchema out = input_schema;
  for (const auto& [col, e] : edges) {
    out.columns[col].kind = ColumnKind::kDiscrete;
    out.columns[col].cardinality = bins;
    out.columns[col].categories.clear();
  }
  return out;
}

int Discretizer::bin_of(int column, double value) const {
  const auto& e = edges.at(column);
  // A value equal to an edge falls in the bin above it.
  const auto above = std::upper_bound(e.begin(), e.end(), value) - e.begin();
  return std::clamp(static_cast<int>(above) + 1, 1, bins);
}

namespace {

std::vector<double> quantile_edges(const std::vector<double>& sorted, int bins) {
  std::vector<double> e;
  const double n1 = static_cast<double>(sorted.size() - 1);
  for (int k = 1; k < bins; ++k) {
    const double pos = n1 * k / bins;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    e.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  return e;
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

Discretizer fit_discretizer(const TabularDataset& ds, int bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidInput, "bin count must be at least 2");
  Discretizer disc;
  disc.input_schema = ds.schema;
  disc.bins = bins;
  for (std::size_t c = 0; c < ds.width(); ++c) {
    if (ds.schema[c].is_discrete()) continue;
    std::vector<double> v(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) v[r] = ds.at(r, c);
    std::sort(v.begin(), v.end());
    std::vector<double> distinct = v;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < static_cast<std::size_t>(bins)) {
      throw Error(ErrorCode::kTooFewDistinctValues,
                  "column '" + ds.schema[c].name + "' has " + std::to_string(distinct.size()) +
                      " distinct values, fewer than " + std::to_string(bins) + " bins");
    }
    auto e = quantile_edges(v, bins);
    // Heavy ties can collapse sample quantiles; fall back to quantiles of the
    // distinct values, which are strictly increasing.
    if (!strictly_increasing(e)) e = quantile_edges(distinct, bins);
    disc.edges[static_cast<int>(c)] = std::move(e);
  }
  return disc;
}

TabularDataset apply_discretizer(const Discretizer& disc, const TabularDataset& ds) {
  if (!disc.edges.empty() && same_structure(ds.schema, disc.output_schema())) return ds;
  align_schemas(disc.input_schema, ds.schema);
  TabularDataset out = ds;
  out.schema = disc.output_schema();
  const std::size_t d = ds.width();
  for (const auto& [col, e] : disc.edges) {
    for (std::size_t r = 0; r < ds.size(); ++r) {
      out.values[r * d + col] = disc.bin_of(col, ds.at(r, col));
    }
  }
  return out;
}

MarginalSource MarginalSource::from_dataset(const TabularDataset& ds) {
  MarginalSource m;
  m.data_ = &ds;
  m.schema_ = ds.schema;
  return m;
}

MarginalSource MarginalSource::from_joint(const EmpiricalPmf& joint, FeatureSchema schema) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (joint.find_axis(Axis::of_feature(static_cast<int>(i))) < 0) {
      throw Error(ErrorCode::kMissingAxis, "joint table lacks feature axis " + std::to_string(i));
    }
  }
  MarginalSource m;
  m.joint_ = &joint;
  m.schema_ = std::move(schema);
  return m;
}

EmpiricalPmf MarginalSource::marginal(std::span<const Axis> axes) const {
  if (joint_ != nullptr) return joint_->marginalize(axes);
  return estimate_pmf(*data_, axes);
}

}  // namespace shiftscope

#include "shiftscope/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "shiftscope/error.hpp"
#include "shiftscope/random.hpp"

namespace shiftscope {

namespace {

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

Rational pct(std::int64_t p) { return Rational(p, 100); }

// Mixed-radix cell index over x_I levels then label, label fastest.
std::size_t spec_cell(const SjsSpec& spec, std::span<const double> row, int y) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < spec.shifted.size(); ++k) {
    idx = idx * static_cast<std::size_t>(spec.cardinalities[k]) +
          static_cast<std::size_t>(static_cast<int>(row[static_cast<std::size_t>(spec.shifted[k])]) - 1);
  }
  return idx * static_cast<std::size_t>(spec.labels) + static_cast<std::size_t>(y - 1);
}

std::string describe_cell(const SjsSpec& spec, std::size_t cell) {
  const int y = static_cast<int>(cell % static_cast<std::size_t>(spec.labels)) + 1;
  std::size_t rest = cell / static_cast<std::size_t>(spec.labels);
  std::vector<int> levels(spec.shifted.size());
  for (std::size_t k = spec.shifted.size(); k-- > 0;) {
    levels[k] = static_cast<int>(rest % static_cast<std::size_t>(spec.cardinalities[k])) + 1;
    rest /= static_cast<std::size_t>(spec.cardinalities[k]);
  }
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < levels.size(); ++k) os << "x" << spec.shifted[k] << "=" << levels[k] << ", ";
  os << "y=" << y << ")";
  return os.str();
}

}  // namespace

std::size_t AnalyticDistribution::cell(std::span<const int> x, int y) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    idx = idx * static_cast<std::size_t>(schema[i].cardinality) + static_cast<std::size_t>(x[i] - 1);
  }
  return idx * static_cast<std::size_t>(schema.label_cardinality) + static_cast<std::size_t>(y - 1);
}

void AnalyticDistribution::unflatten(std::size_t c, std::span<int> x, int& y) const {
  const auto L = static_cast<std::size_t>(schema.label_cardinality);
  y = static_cast<int>(c % L) + 1;
  c /= L;
  for (std::size_t i = schema.size(); i-- > 0;) {
    const auto card = static_cast<std::size_t>(schema[i].cardinality);
    x[i] = static_cast<int>(c % card) + 1;
    c /= card;
  }
}

Rational AnalyticDistribution::total() const {
  return std::accumulate(joint.begin(), joint.end(), Rational(0));
}

Rational AnalyticDistribution::feature_mass(std::span<const int> x) const {
  Rational s = 0;
  for (int y = 1; y <= schema.label_cardinality; ++y) s += mass(x, y);
  return s;
}

Rational AnalyticDistribution::label_given_features(std::span<const int> x, int y) const {
  const Rational px = feature_mass(x);
  if (px == Rational(0)) return Rational(0);
  return mass(x, y) / px;
}

Rational AnalyticDistribution::label_mass(int y) const {
  Rational s = 0;
  const auto L = static_cast<std::size_t>(schema.label_cardinality);
  for (std::size_t c = static_cast<std::size_t>(y - 1); c < joint.size(); c += L) s += joint[c];
  return s;
}

Rational AnalyticDistribution::feature_given_label(int feature, int level, int y) const {
  std::vector<int> x(schema.size());
  Rational num = 0;
  for (std::size_t c = 0; c < joint.size(); ++c) {
    int cy = 0;
    unflatten(c, x, cy);
    if (cy == y && x[static_cast<std::size_t>(feature)] == level) num += joint[c];
  }
  const Rational den = label_mass(y);
  return den == Rational(0) ? Rational(0) : num / den;
}

std::vector<double> AnalyticDistribution::masses() const {
  std::vector<double> m(joint.size());
  std::transform(joint.begin(), joint.end(), m.begin(), to_double);
  return m;
}

EmpiricalPmf AnalyticDistribution::population_table(
    const std::function<int(std::span<const int>)>& f) const {
  std::vector<Axis> axes;
  std::vector<int> cards;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    axes.push_back(Axis::of_feature(static_cast<int>(i)));
    cards.push_back(schema[i].cardinality);
  }
  const int L = schema.label_cardinality;
  axes.push_back(Axis::prediction());
  cards.push_back(L);
  axes.push_back(Axis::label());
  cards.push_back(L);
  std::vector<double> counts(checked_cell_count(cards), 0.0);
  EmpiricalPmf shape(axes, cards, counts, 1.0);
  std::vector<int> x(schema.size());
  std::vector<int> levels(axes.size());
  for (std::size_t c = 0; c < joint.size(); ++c) {
    int y = 0;
    unflatten(c, x, y);
    std::copy(x.begin(), x.end(), levels.begin());
    levels[schema.size()] = f(x);
    levels[schema.size() + 1] = y;
    counts[shape.flat_index(levels)] += to_double(joint[c]);
  }
  EmpiricalPmf out(std::move(axes), std::move(cards), std::move(counts), 1.0);
  return out;
}

AnalyticDistribution make_analytic(FeatureSchema schema,
                                   const std::function<Rational(std::span<const int>, int)>& mass) {
  schema.validate();
  if (!schema.all_discrete()) throw Error(ErrorCode::kInvalidInput, "analytic schema must be discrete");
  AnalyticDistribution dist;
  dist.schema = std::move(schema);
  std::vector<int> cards;
  for (const auto& c : dist.schema.columns) cards.push_back(c.cardinality);
  cards.push_back(dist.schema.label_cardinality);
  dist.joint.assign(checked_cell_count(cards), Rational(0));
  std::vector<int> x(dist.schema.size());
  for (std::size_t c = 0; c < dist.joint.size(); ++c) {
    int y = 0;
    dist.unflatten(c, x, y);
    dist.joint[c] = mass(x, y);
    if (dist.joint[c] < Rational(0)) throw Error(ErrorCode::kInvalidInput, "negative mass");
  }
  if (dist.total() != Rational(1)) throw Error(ErrorCode::kInvalidInput, "masses do not sum to 1");
  return dist;
}

AnalyticFixture theorem2_fixture() {
  const auto schema = FeatureSchema::uniform_discrete(2, 2, 2);
  // Per label: {p(Y), p(X1 = 1 | Y), p(X2 = 1 | Y)}.
  auto build = [&](Rational y1, Rational x1_y0, Rational x2_y0, Rational x1_y1, Rational x2_y1) {
    return make_analytic(schema, [=](std::span<const int> x, int y) {
      const bool pos = y == 2;
      const Rational py = pos ? y1 : Rational(1) - y1;
      const Rational a = pos ? x1_y1 : x1_y0;
      const Rational b = pos ? x2_y1 : x2_y0;
      return py * (x[0] == 2 ? a : Rational(1) - a) * (x[1] == 2 ? b : Rational(1) - b);
    });
  };
  AnalyticFixture fx;
  fx.source = build(Rational(1, 2), Rational(7, 10), Rational(6, 10), Rational(1, 10), Rational(2, 10));
  fx.target = build(Rational(6, 10), Rational(5, 10), Rational(6, 10), Rational(5, 10), Rational(2, 10));

  auto w = TableWeights::uniform({0}, {2}, 2);
  for (int x1 = 1; x1 <= 2; ++x1) {
    for (int y = 1; y <= 2; ++y) {
      Rational p = 0, q = 0;
      for (int x2 = 1; x2 <= 2; ++x2) {
        const int x[2] = {x1, x2};
        p += fx.source.mass(x, y);
        q += fx.target.mass(x, y);
      }
      const int lv[1] = {x1};
      w.weights[w.cell(lv, y)] = to_double(q / p);
    }
  }
  fx.truth.true_weights = w;
  fx.truth.true_shift_set = {0};
  return fx;
}

AnalyticDistribution naive_bayes(std::span<const Rational> label_prior,
                                 const std::vector<std::vector<Rational>>& feature_on) {
  auto schema = FeatureSchema::uniform_discrete(feature_on.size(), 2, static_cast<int>(label_prior.size()));
  std::vector<Rational> prior(label_prior.begin(), label_prior.end());
  return make_analytic(schema, [&](std::span<const int> x, int y) {
    Rational m = prior[static_cast<std::size_t>(y - 1)];
    for (std::size_t i = 0; i < feature_on.size(); ++i) {
      const Rational on = feature_on[i][static_cast<std::size_t>(y - 1)];
      m *= x[i] == 2 ? on : Rational(1) - on;
    }
    return m;
  });
}

AnalyticDistribution covid_analog_base() {
  FeatureSchema schema;
  for (const char* name : {"aged", "gender", "contact_risk", "fever", "cough", "fatigue", "taste_loss"}) {
    auto c = Column::discrete(name, 2);
    c.categories = {"0", "1"};
    schema.columns.push_back(c);
  }
  schema.label_cardinality = 2;
  schema.label_name = "covid";
  schema.label_categories = {"negative", "positive"};
  // Symptom rates p(x = 1 | aged, y): {young neg, young pos, aged neg, aged pos}.
  const std::vector<std::array<std::int64_t, 4>> rates = {
      {60, 60, 60, 60},  // gender
      {30, 55, 30, 55},  // contact_risk
      {25, 45, 15, 80},  // fever
      {30, 50, 25, 75},  // cough
      {35, 45, 30, 65},  // fatigue
      {10, 30, 10, 40},  // taste_loss
  };
  return make_analytic(schema, [&](std::span<const int> x, int y) {
    const bool aged = x[0] == 2;
    Rational m = pct(50) * (y == 2 ? pct(40) : pct(60));
    const std::size_t group = (aged ? 2 : 0) + (y == 2 ? 1 : 0);
    for (std::size_t j = 0; j < rates.size(); ++j) {
      const Rational on = pct(rates[j][group]);
      m *= x[j + 1] == 2 ? on : Rational(1) - on;
    }
    return m;
  });
}

TabularDataset sample_analytic(const AnalyticDistribution& dist, std::size_t n, std::uint64_t seed,
                               bool with_labels) {
  const auto cum = cumulative_sums(dist.masses());
  Rng rng(seed);
  TabularDataset ds;
  ds.schema = dist.schema;
  ds.rows = n;
  ds.values.reserve(n * dist.schema.size());
  std::vector<int> labels;
  labels.reserve(n);
  std::vector<int> x(dist.schema.size());
  for (std::size_t r = 0; r < n; ++r) {
    int y = 0;
    dist.unflatten(rng.categorical(cum), x, y);
    for (int v : x) ds.values.push_back(v);
    labels.push_back(y);
  }
  if (with_labels) ds.labels = std::move(labels);
  return ds;
}

void SjsSpec::validate() const {
  if (shifted.size() != cardinalities.size()) {
    throw Error(ErrorCode::kInvalidInput, "spec: one cardinality per shifted feature required");
  }
  if (labels < 2) throw Error(ErrorCode::kInvalidInput, "spec: at least 2 labels required");
  if (!std::is_sorted(shifted.begin(), shifted.end()) ||
      std::adjacent_find(shifted.begin(), shifted.end()) != shifted.end()) {
    throw Error(ErrorCode::kInvalidInput, "spec: shifted features must be sorted and distinct");
  }
  std::size_t cells = static_cast<std::size_t>(labels);
  for (int c : cardinalities) {
    if (c < 2) throw Error(ErrorCode::kInvalidInput, "spec: cardinality below 2");
    cells *= static_cast<std::size_t>(c);
  }
  if (marginal.size() != cells) {
    throw Error(ErrorCode::kInvalidInput, "spec: marginal has " + std::to_string(marginal.size()) +
                                              " cells, expected " + std::to_string(cells));
  }
  double sum = 0.0;
  for (double m : marginal) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error(ErrorCode::kInvalidInput, "spec: negative mass");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidInput, "spec: marginal does not sum to 1");
}

void SjsSpec::validate(const FeatureSchema& schema) const {
  validate();
  if (labels != schema.label_cardinality) {
    throw Error(ErrorCode::kInvalidInput, "spec: label cardinality differs from the base");
  }
  for (std::size_t k = 0; k < shifted.size(); ++k) {
    const int i = shifted[k];
    if (i < 0 || static_cast<std::size_t>(i) >= schema.size()) {
      throw Error(ErrorCode::kInvalidInput, "spec: shifted feature " + std::to_string(i) +
                                                " outside a base with d = " + std::to_string(schema.size()));
    }
    const auto& col = schema[static_cast<std::size_t>(i)];
    if (!col.is_discrete() || col.cardinality != cardinalities[k]) {
      throw Error(ErrorCode::kInvalidInput, "spec: cardinality mismatch on column '" + col.name + "'");
    }
  }
}

SjsSpec empirical_spec(const TabularDataset& base, std::vector<int> shifted) {
  if (!base.has_labels()) throw Error(ErrorCode::kMissingAxis, "base dataset needs labels");
  SjsSpec spec;
  spec.shifted = std::move(shifted);
  spec.labels = base.schema.label_cardinality;
  std::size_t cells = static_cast<std::size_t>(spec.labels);
  for (int i : spec.shifted) {
    spec.cardinalities.push_back(base.schema[static_cast<std::size_t>(i)].cardinality);
    cells *= static_cast<std::size_t>(spec.cardinalities.back());
  }
  spec.marginal.assign(cells, 0.0);
  for (std::size_t r = 0; r < base.size(); ++r) {
    spec.marginal[spec_cell(spec, base.row(r), (*base.labels)[r])] += 1.0;
  }
  for (double& m : spec.marginal) m /= static_cast<double>(std::max<std::size_t>(base.size(), 1));
  return spec;
}

SjsSpec tilt_spec(const SjsSpec& spec, const std::vector<std::vector<std::vector<double>>>& tilt) {
  SjsSpec out = spec;
  double sum = 0.0;
  for (std::size_t c = 0; c < out.marginal.size(); ++c) {
    const int y = static_cast<int>(c % static_cast<std::size_t>(spec.labels)) + 1;
    std::size_t rest = c / static_cast<std::size_t>(spec.labels);
    double e = 0.0;
    for (std::size_t k = spec.shifted.size(); k-- > 0;) {
      const auto card = static_cast<std::size_t>(spec.cardinalities[k]);
      e += tilt[k][rest % card][static_cast<std::size_t>(y - 1)];
      rest /= card;
    }
    out.marginal[c] *= std::exp(e);
    sum += out.marginal[c];
  }
  for (double& m : out.marginal) m /= sum;
  return out;
}

TableWeights spec_ratio(const SjsSpec& target, const SjsSpec& source) {
  if (target.shifted != source.shifted || target.cardinalities != source.cardinalities ||
      target.labels != source.labels) {
    throw Error(ErrorCode::kInvalidInput, "specs cover different cells");
  }
  auto w = TableWeights::uniform(target.shifted, target.cardinalities, target.labels);
  for (std::size_t c = 0; c < w.cell_count(); ++c) {
    if (source.marginal[c] > 0.0) {
      w.weights[c] = target.marginal[c] / source.marginal[c];
    } else {
      w.known[c] = 0;
    }
  }
  return w;
}

ShiftedSample apply_sjs(const TabularDataset& base, const SjsSpec& spec, std::size_t n,
                        std::uint64_t seed) {
  if (!base.has_labels()) throw Error(ErrorCode::kMissingAxis, "base dataset needs labels");
  spec.validate(base.schema);
  std::vector<std::vector<std::size_t>> members(spec.cell_count());
  for (std::size_t r = 0; r < base.size(); ++r) {
    members[spec_cell(spec, base.row(r), (*base.labels)[r])].push_back(r);
  }
  for (std::size_t c = 0; c < spec.cell_count(); ++c) {
    if (spec.marginal[c] > 0.0 && members[c].empty()) {
      throw Error(ErrorCode::kEmptyCell, "no base rows in cell " + describe_cell(spec, c));
    }
  }
  const auto cum = cumulative_sums(spec.marginal);
  Rng rng(seed);
  std::vector<std::size_t> picks;
  picks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = members[rng.categorical(cum)];
    picks.push_back(m[rng.index(m.size())]);
  }
  ShiftedSample out;
  out.data = base.select_rows(picks);
  out.data.predictions.reset();
  out.data.pred_probs.reset();

  auto w = TableWeights::uniform(spec.shifted, spec.cardinalities, spec.labels);
  for (std::size_t c = 0; c < spec.cell_count(); ++c) {
    if (members[c].empty()) {
      w.known[c] = 0;
      continue;
    }
    const double p = static_cast<double>(members[c].size()) / static_cast<double>(base.size());
    w.weights[c] = spec.marginal[c] / p;
  }
  out.truth.true_weights = std::move(w);
  out.truth.true_shift_set = spec.shifted;
  return out;
}

ShiftedSample pure_label_shift(const TabularDataset& base, std::span<const double> label_marginal,
                               std::size_t n, std::uint64_t seed) {
  SjsSpec spec;
  spec.labels = base.schema.label_cardinality;
  spec.marginal.assign(label_marginal.begin(), label_marginal.end());
  return apply_sjs(base, spec, n, seed);
}

SjsSpec covariate_shift_spec(const TabularDataset& base, int feature,
                             std::span<const double> feature_marginal) {
  const auto observed = empirical_spec(base, {feature});
  SjsSpec spec = observed;
  const auto L = static_cast<std::size_t>(spec.labels);
  if (feature_marginal.size() != static_cast<std::size_t>(spec.cardinalities[0])) {
    throw Error(ErrorCode::kInvalidInput, "feature marginal has the wrong number of levels");
  }
  for (std::size_t v = 0; v < feature_marginal.size(); ++v) {
    double px = 0.0;
    for (std::size_t y = 0; y < L; ++y) px += observed.marginal[v * L + y];
    if (px == 0.0 && feature_marginal[v] > 0.0) {
      throw Error(ErrorCode::kEmptyCell,
                  "no base rows with x" + std::to_string(feature) + "=" + std::to_string(v + 1));
    }
    for (std::size_t y = 0; y < L; ++y) {
      const std::size_t c = v * L + y;
      spec.marginal[c] = px > 0.0 ? feature_marginal[v] * observed.marginal[c] / px : 0.0;
    }
  }
  return spec;
}

SjsSpec analytic_spec(const AnalyticDistribution& dist, std::vector<int> shifted) {
  SjsSpec spec;
  spec.shifted = std::move(shifted);
  spec.labels = dist.schema.label_cardinality;
  std::size_t cells = static_cast<std::size_t>(spec.labels);
  for (int i : spec.shifted) {
    spec.cardinalities.push_back(dist.schema[static_cast<std::size_t>(i)].cardinality);
    cells *= static_cast<std::size_t>(spec.cardinalities.back());
  }
  std::vector<Rational> exact(cells, Rational(0));
  std::vector<int> x(dist.schema.size());
  std::vector<double> row(dist.schema.size());
  for (std::size_t c = 0; c < dist.cell_count(); ++c) {
    int y = 0;
    dist.unflatten(c, x, y);
    std::copy(x.begin(), x.end(), row.begin());
    exact[spec_cell(spec, row, y)] += dist.joint[c];
  }
  spec.marginal.resize(cells);
  std::transform(exact.begin(), exact.end(), spec.marginal.begin(), to_double);
  return spec;
}

ShiftedSample pure_covariate_shift(const TabularDataset& base, int feature,
                                   std::span<const double> feature_marginal, std::size_t n,
                                   std::uint64_t seed) {
  if (!base.has_labels()) throw Error(ErrorCode::kMissingAxis, "base dataset needs labels");
  return apply_sjs(base, covariate_shift_spec(base, feature, feature_marginal), n, seed);
}

}  // namespace shiftscope

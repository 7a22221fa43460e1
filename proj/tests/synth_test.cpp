#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/synth.hpp"
#include "shiftscope/tabulate.hpp"

using namespace shiftscope;

namespace {

// p(Y = 1 | X1 = 1, X2 = 1) in the fixture's 0/1 coding.
Rational positive_given_ones(const AnalyticDistribution& d) {
  const int x[] = {2, 2};
  return d.label_given_features(x, 2);
}

double base_mean(const WeightFunction& w, const TabularDataset& base) {
  const auto eval = evaluate_weights(w, base);
  double m = 0.0;
  for (double v : eval.values) m += v;
  return m / static_cast<double>(base.size());
}

// 5000 young and 5000 aged rows, 40% positive in each group.
TabularDataset aged_base() {
  TabularDataset ds;
  ds.schema = FeatureSchema::uniform_discrete(2, 2, 2);
  std::vector<int> labels;
  for (int aged = 1; aged <= 2; ++aged) {
    for (int i = 0; i < 5000; ++i) {
      ds.values.push_back(aged);
      ds.values.push_back(1 + i % 2);
      labels.push_back(i < 2000 ? 2 : 1);
    }
  }
  ds.rows = 10000;
  ds.labels = labels;
  return ds;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("non-identifiability fixture matches the stated conditionals") {
  const auto fx = theorem2_fixture();
  CHECK(fx.source.total() == Rational(1));
  CHECK(fx.target.total() == Rational(1));
  CHECK(positive_given_ones(fx.target) == Rational(1, 3));
  CHECK(positive_given_ones(fx.source) == Rational(1, 22));
  CHECK(fx.source.feature_given_label(0, 2, 2) == Rational(1, 10));
  CHECK(fx.target.feature_given_label(0, 2, 2) == Rational(1, 2));
  CHECK(fx.source.label_mass(2) == Rational(1, 2));
  CHECK(fx.target.label_mass(2) == Rational(3, 5));
  // X2 | Y is the same on both sides.
  for (int y = 1; y <= 2; ++y) {
    CHECK(fx.source.feature_given_label(1, 2, y) == fx.target.feature_given_label(1, 2, y));
  }
  CHECK(fx.truth.true_shift_set == std::vector<int>{0});
  const int lv[] = {2};
  CHECK(std::get<TableWeights>(fx.truth.true_weights).lookup(lv, 2) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("make_analytic insists on total mass 1") {
  CHECK_THROWS_AS(make_analytic(FeatureSchema::uniform_discrete(1, 2, 2),
                                [](std::span<const int>, int) { return Rational(1, 5); }),
                  Error);
}

TEST_CASE("large samples follow the label prior") {
  const auto ds = sample_analytic(theorem2_fixture().source, 1'000'000, 17);
  double pos = 0;
  for (int y : *ds.labels) pos += y == 2;
  CHECK(std::abs(pos / 1e6 - 0.5) < 0.002);
}

TEST_CASE("sampling is deterministic and handles tiny sizes") {
  const auto dist = covid_analog_base();
  const auto a = sample_analytic(dist, 500, 99);
  const auto b = sample_analytic(dist, 500, 99);
  CHECK(a.values == b.values);
  CHECK(*a.labels == *b.labels);
  const auto c = sample_analytic(dist, 500, 100);
  CHECK(a.values != c.values);
  const auto one = sample_analytic(dist, 1, 1);
  CHECK(one.size() == 1);
  CHECK(validate_dataset(one).empty());
  const auto unlabeled = sample_analytic(dist, 10, 1, false);
  CHECK_FALSE(unlabeled.has_labels());
}

TEST_CASE("identity spec gives unit truth weights") {
  const auto base = sample_analytic(covid_analog_base(), 5000, 3);
  const auto spec = empirical_spec(base, {0, 3});
  const auto out = apply_sjs(base, spec, 2000, 4);
  for (double w : std::get<TableWeights>(out.truth.true_weights).weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.data.size() == 2000);
  CHECK(out.truth.true_shift_set == std::vector<int>{0, 3});
}

TEST_CASE("aged-group shift has truth weight 2 at (aged, positive)") {
  const auto base = aged_base();
  SjsSpec spec;
  spec.shifted = {0};
  spec.cardinalities = {2};
  spec.labels = 2;
  spec.marginal = {0.25, 0.25, 0.1, 0.4};
  const auto out = apply_sjs(base, spec, 5000, 8);
  const auto& w = std::get<TableWeights>(out.truth.true_weights);
  const int aged[] = {2};
  CHECK(w.lookup(aged, 2) == doctest::Approx(2.0).epsilon(1e-12));
  const int young[] = {1};
  CHECK(w.lookup(young, 2) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(base_mean(out.truth.true_weights, base) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero rows is a valid request") {
  const auto base = aged_base();
  const auto out = apply_sjs(base, empirical_spec(base, {0}), 0, 1);
  CHECK(out.data.size() == 0);
  CHECK(validate_dataset(out.data).empty());
}

TEST_CASE("a spec cell without base rows is an EmptyCell error") {
  auto base = aged_base();
  SjsSpec spec;
  spec.shifted = {1};
  spec.cardinalities = {3};
  spec.labels = 2;
  spec.marginal = {0.2, 0.2, 0.2, 0.2, 0.1, 0.1};
  base.schema.columns[1].cardinality = 3;
  try {
    apply_sjs(base, spec, 10, 1);
    FAIL("expected EmptyCell");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyCell);
  }
}

TEST_CASE("malformed specs are rejected") {
  SjsSpec spec;
  spec.shifted = {0};
  spec.cardinalities = {2};
  spec.marginal = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.marginal = {0.5, 0.6, -0.1, 0.0};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.marginal = {0.25, 0.25, 0.25, 0.25};
  CHECK_NOTHROW(spec.validate());
  CHECK_THROWS_AS(spec.validate(FeatureSchema::uniform_discrete(1, 3, 2)), Error);
}

TEST_CASE("label shift with the same marginal is the identity") {
  const auto base = aged_base();
  const double same[] = {0.6, 0.4};
  const auto out = pure_label_shift(base, same, 1000, 2);
  for (double w : std::get<TableWeights>(out.truth.true_weights).weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty shift set and label shift agree") {
  const auto base = aged_base();
  const double marginal[] = {0.3, 0.7};
  const auto a = pure_label_shift(base, marginal, 1000, 5);
  SjsSpec spec;
  spec.labels = 2;
  spec.marginal = {0.3, 0.7};
  const auto b = apply_sjs(base, spec, 1000, 5);
  CHECK(std::get<TableWeights>(a.truth.true_weights).weights == std::get<TableWeights>(b.truth.true_weights).weights);
  CHECK(a.data.values == b.data.values);
}

TEST_CASE("covariate shift keeps p(y | x_I)") {
  const auto base = sample_analytic(covid_analog_base(), 50000, 11);
  const double marginal[] = {0.2, 0.8};
  const auto out = pure_covariate_shift(base, 0, marginal, 10000, 12);
  for (int aged = 1; aged <= 2; ++aged) {
    // 2 x 2 contingency table: sample (base, shifted) by label.
    double table[2][2] = {{0, 0}, {0, 0}};
    const TabularDataset* sets[] = {&base, &out.data};
    for (int s = 0; s < 2; ++s) {
      for (std::size_t r = 0; r < sets[s]->size(); ++r) {
        if (sets[s]->level(r, 0) == aged) table[s][(*sets[s]->labels)[r] - 1] += 1;
      }
    }
    const double n = table[0][0] + table[0][1] + table[1][0] + table[1][1];
    double chi2 = 0.0;
    for (int s = 0; s < 2; ++s) {
      for (int y = 0; y < 2; ++y) {
        const double e = (table[s][0] + table[s][1]) * (table[0][y] + table[1][y]) / n;
        chi2 += (table[s][y] - e) * (table[s][y] - e) / e;
      }
    }
    CHECK(chi2 < 10.83);  // chi-square, 1 dof, 0.1%
  }
  double aged_share = 0.0;
  for (std::size_t r = 0; r < out.data.size(); ++r) aged_share += out.data.level(r, 0) == 2;
  CHECK(aged_share / 10000.0 == doctest::Approx(0.8).epsilon(0.02));
  CHECK(base_mean(out.truth.true_weights, base) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("resampling keeps p(x_rest | x_I, y)") {
  const auto base = sample_analytic(covid_analog_base(), 50000, 21);
  SjsSpec spec = analytic_spec(covid_analog_base(), {0});
  spec.marginal = {0.25, 0.25, 0.1, 0.4};
  const auto out = apply_sjs(base, spec, 20000, 22);
  const Axis axes[] = {Axis::of_feature(0), Axis::label(), Axis::of_feature(3)};
  const auto pb = estimate_pmf(base, axes);
  const auto ps = estimate_pmf(out.data, axes);
  for (int a = 1; a <= 2; ++a) {
    for (int y = 1; y <= 2; ++y) {
      const int on[] = {a, y, 2}, off[] = {a, y, 1};
      const double cb = pb.mass(on) / (pb.mass(on) + pb.mass(off));
      const double cs = ps.mass(on) / (ps.mass(on) + ps.mass(off));
      CHECK(std::abs(cb - cs) < 0.03);
    }
  }
}

TEST_CASE("spec ratio and analytic spec") {
  const auto fx = theorem2_fixture();
  const auto p = analytic_spec(fx.source, {0});
  const auto q = analytic_spec(fx.target, {0});
  const auto w = spec_ratio(q, p);
  const auto& truth = std::get<TableWeights>(fx.truth.true_weights);
  for (std::size_t c = 0; c < 4; ++c) CHECK(w.weights[c] == doctest::Approx(truth.weights[c]).epsilon(1e-12));
  auto other = q;
  other.shifted = {1};
  CHECK_THROWS_AS(spec_ratio(other, p), Error);
}

TEST_CASE("covid analog base") {
  const auto dist = covid_analog_base();
  CHECK(dist.total() == Rational(1));
  CHECK(dist.schema.size() == 7);
  CHECK(dist.schema[0].name == "aged");
  CHECK(dist.label_mass(2) == Rational(2, 5));
}

}

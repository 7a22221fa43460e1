#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "shiftscope/data_model.hpp"
#include "shiftscope/estimator.hpp"
#include "shiftscope/tabulate.hpp"

namespace shiftscope {

using Rational = boost::rational<std::int64_t>;

/// Exact pmf over (x, y) for an all-discrete schema. Cells are ordered with
/// features varying slowest in column order and the label fastest.
struct AnalyticDistribution {
  FeatureSchema schema;
  std::vector<Rational> joint;

  std::size_t cell_count() const { return joint.size(); }
  std::size_t cell(std::span<const int> x, int y) const;
  void unflatten(std::size_t cell, std::span<int> x, int& y) const;
  Rational mass(std::span<const int> x, int y) const { return joint[cell(x, y)]; }
  Rational total() const;
  /// p(x) summed over labels.
  Rational feature_mass(std::span<const int> x) const;
  /// p(y | x); zero when p(x) = 0.
  Rational label_given_features(std::span<const int> x, int y) const;
  /// p(x_i = level | y).
  Rational feature_given_label(int feature, int level, int y) const;
  /// p(y).
  Rational label_mass(int y) const;

  std::vector<double> masses() const;

  /// Population table over [X_1..X_d, PREDICTION, LABEL] for a fixed
  /// classifier f(x), usable with MarginalSource::from_joint.
  EmpiricalPmf population_table(const std::function<int(std::span<const int>)>& f) const;
};

/// Builds a distribution cell by cell from a mass function; throws
/// kInvalidInput unless the masses sum to exactly 1.
AnalyticDistribution make_analytic(FeatureSchema schema,
                                   const std::function<Rational(std::span<const int>, int)>& mass);

struct AnalyticFixture {
  AnalyticDistribution source;
  AnalyticDistribution target;
  GroundTruth truth;
};

/// The two-feature source/target pair from the non-identifiability argument
/// for unrestricted joint shift; the target differs from the source in
/// (X1, Y) only. Levels 1/2 encode the binary values 0/1, labels likewise.
AnalyticFixture theorem2_fixture();

/// Independent binary features given the label.
/// `feature_on[i][y - 1]` = p(x_i = 2 | y).
AnalyticDistribution naive_bayes(std::span<const Rational> label_prior,
                                 const std::vector<std::vector<Rational>>& feature_on);

/// Seven binary features (aged, gender, contact_risk, fever, cough, fatigue,
/// taste_loss) and a binary test result. Symptom rates depend on age group
/// and outcome, so classifier accuracy differs between groups.
AnalyticDistribution covid_analog_base();

/// i.i.d. rows by inverse CDF over the flattened table.
TabularDataset sample_analytic(const AnalyticDistribution& dist, std::size_t n, std::uint64_t seed,
                               bool with_labels = true);

/// Target pmf over (X_I, Y), cells ordered like TableWeights (x_I levels
/// slowest, label fastest).
struct SjsSpec {
  std::vector<int> shifted;
  std::vector<int> cardinalities;
  int labels = 2;
  std::vector<double> marginal;
  // Free-form pointer to the base dataset (file path or generator name).
  std::string base;

  std::size_t cell_count() const { return marginal.size(); }
  /// Throws kInvalidInput when the spec is malformed or does not fit `schema`.
  void validate(const FeatureSchema& schema) const;
  void validate() const;
};

/// Empirical (X_I, Y) marginal of a labeled dataset in SjsSpec cell order.
SjsSpec empirical_spec(const TabularDataset& base, std::vector<int> shifted);

/// Multiplies each (x_I, y) cell by exp(sum_i tilt[i][x_i - 1][y - 1]) and
/// renormalizes. `tilt[i]` indexes feature shifted[i].
SjsSpec tilt_spec(const SjsSpec& spec, const std::vector<std::vector<std::vector<double>>>& tilt);

struct ShiftedSample {
  TabularDataset data;
  GroundTruth truth;
};

/// Draws (x_I, y) from the spec, then a base row of that cell uniformly with
/// replacement. Truth weights are spec / base-empirical per cell.
ShiftedSample apply_sjs(const TabularDataset& base, const SjsSpec& spec, std::size_t n,
                        std::uint64_t seed);

/// apply_sjs with I empty.
ShiftedSample pure_label_shift(const TabularDataset& base, std::span<const double> label_marginal,
                               std::size_t n, std::uint64_t seed);

/// Spec over (x_i, y) with mass q(x_i) p_base(y | x_i).
SjsSpec covariate_shift_spec(const TabularDataset& base, int feature,
                             std::span<const double> feature_marginal);

/// Marginal of an analytic distribution over (X_I, Y) as a spec.
SjsSpec analytic_spec(const AnalyticDistribution& dist, std::vector<int> shifted);

/// Resamples by x_i alone, keeping p(y | x_i) and p(x_rest | x_i, y).
ShiftedSample pure_covariate_shift(const TabularDataset& base, int feature,
                                   std::span<const double> feature_marginal, std::size_t n,
                                   std::uint64_t seed);

/// Weights q/p per (x_I, y) cell; both specs must share I.
TableWeights spec_ratio(const SjsSpec& target, const SjsSpec& source);

}  // namespace shiftscope

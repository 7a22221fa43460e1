#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/estimator.hpp"
#include "shiftscope/experiments.hpp"
#include "shiftscope/synth.hpp"

using namespace shiftscope;
using shiftscope::testing::discrete_rows;
using shiftscope::testing::with_labels;

namespace {

// Replicates every cell of an exact distribution in proportion to its mass so
// that empirical averages equal population expectations.
TabularDataset expand(const AnalyticDistribution& dist, const std::function<int(std::span<const int>)>& f) {
  std::int64_t denom = 1;
  for (const auto& m : dist.joint) denom = std::lcm(denom, m.denominator());
  TabularDataset ds;
  ds.schema = dist.schema;
  std::vector<int> labels, preds;
  for (std::size_t c = 0; c < dist.cell_count(); ++c) {
    std::vector<int> x(dist.schema.size());
    int y = 0;
    dist.unflatten(c, x, y);
    const auto count = (dist.joint[c] * Rational(denom)).numerator();
    for (std::int64_t k = 0; k < count; ++k) {
      for (int v : x) ds.values.push_back(v);
      labels.push_back(y);
      preds.push_back(f(x));
      ++ds.rows;
    }
  }
  ds.labels = labels;
  ds.predictions = preds;
  return ds;
}

Rational exact_accuracy(const AnalyticDistribution& dist, const std::function<int(std::span<const int>)>& f) {
  Rational acc = 0;
  for (std::size_t c = 0; c < dist.cell_count(); ++c) {
    std::vector<int> x(dist.schema.size());
    int y = 0;
    dist.unflatten(c, x, y);
    if (f(x) == y) acc += dist.joint[c];
  }
  return acc;
}

TabularDataset labeled_with_predictions(std::initializer_list<std::vector<int>> rows, std::vector<int> labels,
                                        std::vector<int> preds) {
  auto ds = with_labels(discrete_rows(rows), std::move(labels));
  ds.predictions = std::move(preds);
  return ds;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("unit weights give a zero gap") {
  const auto ds = labeled_with_predictions({{1}, {2}, {1}}, {1, 2, 2}, {1, 2, 1});
  CHECK(estimate_gap(ds, WeightFunction{TableWeights::uniform({}, {}, 2)}) == 0.0);
}

TEST_CASE("two-row hand example") {
  const auto ds = labeled_with_predictions({{1}, {2}}, {1, 1}, {1, 2});
  const double w[] = {3.0, 0.25};
  CHECK(estimate_gap(ds, w) == 1.0);
  CHECK(source_accuracy(ds) == 0.5);
}

TEST_CASE("population gap with true weights equals the exact accuracy change") {
  const auto fx = theorem2_fixture();
  const auto f = [](std::span<const int> x) { return x[1]; };
  const auto src = expand(fx.source, f);
  const double delta = estimate_gap(src, fx.truth.true_weights);
  const Rational exact = exact_accuracy(fx.target, f) - exact_accuracy(fx.source, f);
  CHECK(delta == doctest::Approx(boost::rational_cast<double>(exact)).epsilon(1e-12));
  CHECK(source_accuracy(src) == doctest::Approx(boost::rational_cast<double>(exact_accuracy(fx.source, f))));
}

TEST_CASE("gap is linear in the weights") {
  const auto sc = covid_scenario(ShiftKind::kJoint, SimulationSizes{2000, 2000, 8000}, 2);
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> w1(sc.source.size()), w2(sc.source.size()), mix(sc.source.size());
  for (auto& v : w1) v = u(gen);
  for (auto& v : w2) v = u(gen);
  for (double alpha : {0.0, 0.3, 0.75, 1.0}) {
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * w1[i] + (1 - alpha) * w2[i];
    const double lhs = estimate_gap(sc.source, mix);
    const double rhs = alpha * estimate_gap(sc.source, w1) + (1 - alpha) * estimate_gap(sc.source, w2);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("gap respects the weight bound") {
  const auto sc = covid_scenario(ShiftKind::kJoint, SimulationSizes{2000, 2000, 8000}, 3);
  const double acc = source_accuracy(sc.source);
  std::vector<double> zero(sc.source.size(), 0.0), top(sc.source.size(), 20.0);
  CHECK(estimate_gap(sc.source, zero) == doctest::Approx(-acc));
  CHECK(estimate_gap(sc.source, top) <= 19.0);
  for (Method m : {Method::kSeesD, Method::kBbse}) {
    const auto run = run_method(m, sc.source, sc.target, MethodOptions{});
    CHECK(run.report.delta_hat >= -acc - 1e-12);
    CHECK(run.report.delta_hat <= 19.0);
  }
}

TEST_CASE("feature selection") {
  CHECK(select_features(WeightFunction{TableWeights::uniform({2}, {2}, 2)}, 1) == std::vector<int>{2});
  const double beta[] = {0, 5, 5, 1};
  CHECK(top_features(beta, 2) == std::vector<int>{1, 2});
  const double flat[] = {1, 1, 1};
  CHECK(top_features(flat, 1) == std::vector<int>{0});
  CHECK(top_features(flat, 0).empty());

  auto basis = std::make_shared<const BasisSet>(default_basis(FeatureSchema::uniform_discrete(3, 2, 2)));
  BasisWeights bw;
  bw.basis = basis;
  bw.coefficients = Eigen::MatrixXd::Zero(6, 2);
  bw.coefficients(2, 0) = 2.0;
  bw.coefficients(4, 1) = 1.0;
  CHECK(select_features(WeightFunction{bw}, 1) == std::vector<int>{1});
  bw.coefficients *= 37.5;
  CHECK(select_features(WeightFunction{bw}, 1) == std::vector<int>{1});
  CHECK(select_features(WeightFunction{bw}, 2) == std::vector<int>{1, 2});
  CHECK(select_features(WeightFunction{DiscriminativeWeights{}}, 1).empty());
}

TEST_CASE("weight scores") {
  const double truth[] = {1, 2, 3, 4};
  const double same[] = {1, 2, 3, 4};
  auto m = score_weights(same, truth);
  CHECK(m.mse == 0.0);
  CHECK(m.pcc == doctest::Approx(1.0));
  const double constant[] = {2, 2, 2, 2};
  std::vector<std::string> warnings;
  m = score_weights(constant, truth, &warnings);
  CHECK(m.pcc == 0.0);
  CHECK(m.pcc_degenerate);
  CHECK(warnings.size() == 1);
  CHECK(m.mse == doctest::Approx(1.5));
}

TEST_CASE("gap scores") {
  GroundTruth truth;
  truth.true_target_accuracy = 0.755;
  CHECK(score_gap(0.155, 0.6, truth) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(score_gap(0.167, 0.6, truth) == doctest::Approx(0.000144).epsilon(1e-9));
  CHECK(score_gap(0.255, 0.6, truth) == doctest::Approx(0.01).epsilon(1e-12));
  GroundTruth none;
  try {
    score_gap(0.1, 0.5, none);
    FAIL("expected MissingTruth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingTruth);
  }
}

TEST_CASE("joint shift weight error orders SEES-d < BBSE < KLIEP") {
  double mse[3] = {0, 0, 0};
  const Method methods[] = {Method::kSeesD, Method::kBbse, Method::kKliep};
  for (int seed = 1; seed <= 3; ++seed) {
    const auto sc = covid_scenario(ShiftKind::kJoint, SimulationSizes{}, static_cast<std::uint64_t>(seed));
    for (int m = 0; m < 3; ++m) {
      auto run = run_method(methods[m], sc.source, sc.target, MethodOptions{});
      attach_truth(run, sc.source, sc.truth);
      mse[m] += run.report.weight_metrics->mse;
    }
  }
  MESSAGE("weight mse SEES-d " << mse[0] / 3 << " BBSE " << mse[1] / 3 << " KLIEP " << mse[2] / 3);
  CHECK(mse[0] < mse[1]);
  CHECK(mse[1] < mse[2]);
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::kSeesC, Method::kSeesD, Method::kBbse, Method::kKliep, Method::kDlu}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK(parse_method("sees-d") == Method::kSeesD);
  CHECK_THROWS_AS(parse_method("lasso"), Error);
}

TEST_CASE("reports carry the accuracy drop and estimated target accuracy") {
  const auto ds = labeled_with_predictions({{1}, {2}}, {1, 1}, {1, 2});
  auto t = TableWeights::uniform({0}, {2}, 2);
  t.weights = {3.0, 1.0, 1.0, 1.0};
  const auto r = make_report(Method::kSeesD, ds, WeightFunction{t}, 1, {});
  CHECK(r.delta_hat == 1.0);
  CHECK(r.accuracy_drop() == -1.0);
  CHECK(r.estimated_target_accuracy == doctest::Approx(1.5));
  CHECK(r.selected_features == std::vector<int>{0});
}

}

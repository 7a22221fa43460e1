#include <cmath>
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "shiftscope/basis.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/weights.hpp"

using namespace shiftscope;
using shiftscope::testing::discrete_rows;
using shiftscope::testing::with_labels;

TEST_SUITE("basis-weights") {

TEST_CASE("default basis has one indicator per discrete level") {
  const auto schema = FeatureSchema::uniform_discrete(3, 3, 2);
  const auto basis = default_basis(schema);
  CHECK(basis.size() == 9);
  for (std::size_t i = 0; i < 3; ++i) CHECK(basis.group(i).size() == 3);
  const double row[] = {2, 1, 3};
  std::vector<double> phi(9);
  basis.evaluate(row, phi);
  CHECK(phi == std::vector<double>{0, 1, 0, 1, 0, 0, 0, 0, 1});
}

TEST_CASE("continuous columns get a linear basis shifted past the sample minimum") {
  FeatureSchema schema;
  schema.columns = {Column::continuous("age"), Column::discrete("sex", 2)};
  TabularDataset ds;
  ds.schema = schema;
  ds.rows = 3;
  ds.values = {20, 1, 35, 2, 50, 1};
  const auto basis = default_basis(schema, &ds);
  REQUIRE(basis.size() == 3);
  const double row[] = {20, 1};
  CHECK(basis[0](row) == doctest::Approx(1.0));
  const double row2[] = {50, 2};
  CHECK(basis[0](row2) == doctest::Approx(31.0));
  // Values below the shifted origin clamp to zero so the basis stays nonnegative.
  const double low[] = {0, 1};
  CHECK(basis[0](low) == 0.0);
}

TEST_CASE("basis sets reject out-of-range features and empty lists") {
  CHECK_THROWS_AS(BasisSet({}, 2), Error);
  CHECK_THROWS_AS(BasisSet({{BasisFunction::Kind::kIndicator, 3, 1, 0.0}}, 2), Error);
}

TEST_CASE("table cells put x_J slowest and y fastest") {
  auto t = TableWeights::uniform({0, 2}, {2, 3}, 2);
  CHECK(t.cell_count() == 12);
  const int x[] = {2, 3};
  CHECK(t.cell(x, 2) == 11);
  const int x0[] = {1, 2};
  CHECK(t.cell(x0, 1) == 2);
  const double row[] = {2, 9, 3};
  CHECK(t.cell_of_row(row, 2) == 11);
}

TEST_CASE("unseen cells fall back to weight 1") {
  auto t = TableWeights::uniform({0}, {2}, 2, 0.0);
  t.weights = {0.5, 2.0, 3.0, 4.0};
  t.known = {1, 1, 0, 1};
  const int x[] = {2};
  CHECK(t.lookup(x, 1) == kUnseenCellWeight);
  CHECK(t.lookup(x, 2) == 4.0);
  const auto ds = with_labels(discrete_rows({{1}, {2}, {2}}), {2, 1, 2});
  const auto eval = evaluate_weights(WeightFunction{t}, ds);
  CHECK(eval.values == std::vector<double>{2.0, 1.0, 4.0});
  CHECK(eval.fallback_count == 1);
}

TEST_CASE("label-dependent weights need labels") {
  const WeightFunction w = TableWeights::uniform({0}, {2}, 2);
  CHECK(depends_on_label(w));
  try {
    evaluate_weights(w, discrete_rows({{1}}));
    FAIL("expected MissingAxis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingAxis);
  }
}

TEST_CASE("basis weights evaluate sum_k a[k, y] phi_k(x)") {
  auto basis = std::make_shared<const BasisSet>(default_basis(FeatureSchema::uniform_discrete(2, 2, 2)));
  BasisWeights bw;
  bw.basis = basis;
  bw.coefficients = Eigen::MatrixXd::Zero(4, 2);
  bw.coefficients << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8;
  const auto ds = with_labels(discrete_rows({{1, 2}, {2, 1}}), {1, 2});
  const auto eval = evaluate_weights(WeightFunction{bw}, ds);
  CHECK(eval.values[0] == doctest::Approx(0.1 + 0.7));
  CHECK(eval.values[1] == doctest::Approx(0.4 + 0.6));
}

TEST_CASE("normalization makes the source mean exactly one") {
  auto t = TableWeights::uniform({0}, {2}, 2);
  t.weights = {1.0, 2.0, 3.0, 6.0};
  WeightFunction w = t;
  const auto ds = with_labels(discrete_rows({{1}, {1}, {2}, {2}}), {1, 2, 1, 2});
  const double factor = normalize_weights(w, ds);
  CHECK(factor == doctest::Approx(1.0 / 3.0));
  const auto eval = evaluate_weights(w, ds);
  double mean = 0.0;
  for (double v : eval.values) mean += v / 4.0;
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normalization of all-zero weights is left alone") {
  WeightFunction w = TableWeights::uniform({0}, {2}, 2, 0.0);
  const auto ds = with_labels(discrete_rows({{1}, {2}}), {1, 2});
  CHECK(normalize_weights(w, ds) == 1.0);
}

}

#include "doctest.h"
#include "helpers.hpp"
#include "shiftscope/error.hpp"

using namespace shiftscope;
using shiftscope::testing::discrete_rows;
using shiftscope::testing::with_labels;

TEST_SUITE("data-model") {

TEST_CASE("well-formed binary dataset has no violations") {
  auto ds = with_labels(discrete_rows({{1, 2}, {2, 1}, {2, 2}}), {1, 2, 2});
  ds.predictions = std::vector<int>{1, 1, 2};
  ds.pred_probs = std::vector<double>{0.6, 0.4, 0.5, 0.5, 0.1, 0.9};
  CHECK(validate_dataset(ds).empty());
}

TEST_CASE("label L+1 yields one violation naming the row") {
  auto ds = with_labels(discrete_rows({{1, 2}, {2, 1}, {2, 2}}), {1, 3, 2});
  const auto v = validate_dataset(ds);
  REQUIRE(v.size() == 1);
  REQUIRE(v[0].row.has_value());
  CHECK(*v[0].row == 1);
}

TEST_CASE("probability row summing to 0.8 is flagged once") {
  auto ds = discrete_rows({{1}, {2}});
  ds.pred_probs = std::vector<double>{0.5, 0.5, 0.4, 0.4};
  const auto v = validate_dataset(ds);
  REQUIRE(v.size() == 1);
  CHECK(*v[0].row == 1);
}

TEST_CASE("discrete cell outside its range is flagged with row and column") {
  auto ds = discrete_rows({{1, 2}, {3, 1}});
  const auto v = validate_dataset(ds);
  REQUIRE(v.size() == 1);
  CHECK(*v[0].row == 1);
  CHECK(*v[0].column == 0);
}

TEST_CASE("negative probability and out-of-range prediction are flagged") {
  auto ds = discrete_rows({{1}, {2}});
  ds.predictions = std::vector<int>{0, 2};
  ds.pred_probs = std::vector<double>{1.2, -0.2, 0.3, 0.7};
  CHECK(validate_dataset(ds).size() == 2);
}

TEST_CASE("align_schemas") {
  const auto a = FeatureSchema::uniform_discrete(4, 2, 2);
  SUBCASE("identical schemas succeed") { CHECK_NOTHROW(align_schemas(a, a)); }
  SUBCASE("missing column") {
    const auto b = FeatureSchema::uniform_discrete(3, 2, 2);
    CHECK_THROWS_AS(align_schemas(a, b), Error);
    try {
      align_schemas(a, b);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchemaMismatch);
      CHECK(std::string(e.what()).find("x4") != std::string::npos);
    }
  }
  SUBCASE("cardinality differs on the third column") {
    auto b = a;
    b.columns[2].cardinality = 3;
    try {
      align_schemas(a, b);
      FAIL("expected SchemaMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchemaMismatch);
      CHECK(std::string(e.what()).find("x3") != std::string::npos);
    }
  }
  SUBCASE("label cardinality differs") {
    auto b = a;
    b.label_cardinality = 3;
    CHECK_THROWS_AS(align_schemas(a, b), Error);
  }
}

TEST_CASE("schema validation") {
  auto s = FeatureSchema::uniform_discrete(2, 2, 2);
  CHECK_NOTHROW(s.validate());
  auto dup = s;
  dup.columns[1].name = "x1";
  CHECK_THROWS_AS(dup.validate(), Error);
  auto empty_name = s;
  empty_name.columns[0].name = "";
  CHECK_THROWS_AS(empty_name.validate(), Error);
  auto low = s;
  low.columns[0].cardinality = 1;
  CHECK_THROWS_AS(low.validate(), Error);
  auto one_label = s;
  one_label.label_cardinality = 1;
  CHECK_THROWS_AS(one_label.validate(), Error);
}

TEST_CASE("select_rows carries every optional field") {
  auto ds = with_labels(discrete_rows({{1}, {2}, {2}}), {1, 2, 1});
  ds.predictions = std::vector<int>{2, 2, 1};
  ds.pred_probs = std::vector<double>{0.1, 0.9, 0.2, 0.8, 0.7, 0.3};
  const std::size_t idx[] = {2, 0, 2};
  const auto out = ds.select_rows(idx);
  CHECK(out.size() == 3);
  CHECK(out.values == std::vector<double>{2, 1, 2});
  CHECK(*out.labels == std::vector<int>{1, 1, 1});
  CHECK(*out.predictions == std::vector<int>{1, 2, 1});
  CHECK(out.probs(1)[1] == doctest::Approx(0.9));
  CHECK_FALSE(ds.without_labels().has_labels());
}

TEST_CASE("error categories are upper snake case") {
  CHECK(error_category(ErrorCode::kFileNotFound) == "FILE_NOT_FOUND");
  CHECK(error_category(ErrorCode::kSchemaMismatch) == "SCHEMA_MISMATCH");
  CHECK(error_category(ErrorCode::kEmptyCell) == "EMPTY_CELL");
}

}

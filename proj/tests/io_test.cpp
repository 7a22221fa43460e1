#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/io.hpp"
#include "shiftscope/synth.hpp"

using namespace shiftscope;
using shiftscope::testing::scratch_dir;

namespace {

FeatureSchema mixed_schema() {
  FeatureSchema s;
  auto sex = Column::discrete("sex", 2);
  sex.categories = {"f", "m"};
  s.columns = {Column::continuous("age"), sex, Column::discrete("grade", 3)};
  s.label_name = "y";
  s.label_categories = {"no", "yes"};
  return s;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kTrainingFailure;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("CSV splitting handles quotes") {
  CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_csv_line("\"x,y\",2") == std::vector<std::string>{"x,y", "2"});
  CHECK(split_csv_line("\"say \"\"hi\"\"\",") == std::vector<std::string>{"say \"hi\"", ""});
  CHECK(csv_field("plain") == "plain");
  CHECK(split_csv_line(csv_field("a,\"b\"")) == std::vector<std::string>{"a,\"b\""});
}

TEST_CASE("doubles print shortest and read back exactly") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("schema round trip") {
  const auto s = mixed_schema();
  const auto back = schema_from_json(schema_to_json(s));
  CHECK(same_structure(s, back));
  CHECK(back[1].categories == s[1].categories);
  CHECK(back.label_categories == s.label_categories);
  CHECK(back.label_name == "y");
  Json bad = schema_to_json(s);
  bad["columns"][0]["kind"] = "ordinal";
  CHECK(code_of([&] { schema_from_json(bad); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("datasets decode categories and integer levels") {
  const auto dir = scratch_dir("io_read");
  write_text(dir / "d.csv", "grade,age,extra,sex,y\n2,31.5,zz,m,yes\n3,40,zz,f,no\n");
  const auto ds = read_dataset(dir / "d.csv", mixed_schema());
  REQUIRE(ds.size() == 2);
  CHECK(ds.row(0)[0] == 31.5);
  CHECK(ds.level(0, 1) == 2);
  CHECK(ds.level(0, 2) == 2);
  CHECK(ds.level(1, 1) == 1);
  CHECK(*ds.labels == std::vector<int>{2, 1});
  CHECK(validate_dataset(ds).empty());

  write_text(dir / "nolabel.csv", "age,sex,grade\n1,f,1\n");
  CHECK_FALSE(read_dataset(dir / "nolabel.csv", mixed_schema()).has_labels());
}

TEST_CASE("dataset read errors") {
  const auto dir = scratch_dir("io_errors");
  const auto schema = mixed_schema();
  CHECK(code_of([&] { read_dataset(dir / "absent.csv", schema); }) == ErrorCode::kFileNotFound);
  write_text(dir / "miss.csv", "age,sex\n1,f\n");
  CHECK(code_of([&] { read_dataset(dir / "miss.csv", schema); }) == ErrorCode::kSchemaMismatch);
  write_text(dir / "na.csv", "age,sex,grade\n1,f,1\nNA,m,2\n");
  try {
    read_dataset(dir / "na.csv", schema);
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRow);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  write_text(dir / "cat.csv", "age,sex,grade\n1,x,1\n");
  CHECK(code_of([&] { read_dataset(dir / "cat.csv", schema); }) == ErrorCode::kMalformedRow);
  write_text(dir / "range.csv", "age,sex,grade\n1,f,4\n");
  CHECK(code_of([&] { read_dataset(dir / "range.csv", schema); }) == ErrorCode::kMalformedRow);
}

TEST_CASE("written datasets read back identically") {
  const auto dir = scratch_dir("io_rt");
  auto ds = sample_analytic(covid_analog_base(), 300, 2);
  write_dataset(ds, dir / "rt.csv");
  const auto back = read_dataset(dir / "rt.csv", ds.schema);
  CHECK(back.values == ds.values);
  CHECK(*back.labels == *ds.labels);

  TabularDataset cont;
  cont.schema = mixed_schema();
  cont.rows = 1;
  cont.values = {0.1 + 0.2, 1, 3};
  cont.labels = std::vector<int>{2};
  write_dataset(cont, dir / "c.csv");
  CHECK(read_dataset(dir / "c.csv", cont.schema).values == cont.values);
}

TEST_CASE("report documents carry the contract keys and round trip") {
  ShiftReport r;
  r.method = Method::kSeesC;
  r.delta_hat = -0.125;
  r.source_accuracy = 0.8;
  r.estimated_target_accuracy = 0.675;
  r.selected_features = {0, 2};
  r.diagnostics = {{"objective", -0.5}, {"iterations", 12}};
  r.weight_metrics = WeightMetrics{0.01, 0.9, false};
  r.warnings = {"something odd"};
  const auto j = report_to_json(r, mixed_schema());
  for (const char* key : {"method", "delta_hat", "source_accuracy", "selected_features", "diagnostics",
                          "weight_metrics"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["accuracy_drop"] == 0.125);
  CHECK(j["selected_feature_names"] == Json::array({"age", "grade"}));
  const auto back = report_from_json(Json::parse(j.dump()));
  CHECK(back.method == r.method);
  CHECK(back.delta_hat == r.delta_hat);
  CHECK(back.selected_features == r.selected_features);
  CHECK(back.diagnostics == r.diagnostics);
  REQUIRE(back.weight_metrics.has_value());
  CHECK(back.weight_metrics->pcc == 0.9);
  CHECK(back.warnings == r.warnings);

  r.weight_metrics.reset();
  const auto j2 = report_to_json(r, mixed_schema());
  CHECK(j2["weight_metrics"].is_null());
  CHECK_FALSE(report_from_json(j2).weight_metrics.has_value());
  CHECK(code_of([] { report_from_json(Json::object()); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("spec and truth files round trip") {
  SjsSpec spec;
  spec.shifted = {0};
  spec.cardinalities = {2};
  spec.marginal = {0.25, 0.25, 0.1, 0.4};
  spec.base = "covid-analog";
  const auto back = sjs_spec_from_json(sjs_spec_to_json(spec));
  CHECK(back.shifted == spec.shifted);
  CHECK(back.marginal == spec.marginal);
  CHECK(back.base == spec.base);

  const auto fx = theorem2_fixture();
  auto truth = fx.truth;
  truth.true_target_accuracy = 0.7;
  const auto dir = scratch_dir("io_truth");
  write_json(truth_to_json(truth, fx.source.schema), dir / "t.json");
  const auto t2 = truth_from_json(read_json(dir / "t.json"));
  CHECK(std::get<TableWeights>(t2.true_weights).weights == std::get<TableWeights>(truth.true_weights).weights);
  CHECK(t2.true_shift_set == truth.true_shift_set);
  CHECK(t2.true_target_accuracy == truth.true_target_accuracy);
  CHECK(shiftscope::testing::slurp(dir / "t.json").back() == '\n');

  write_text(dir / "broken.json", "{\"shifted\": [0");
  CHECK(code_of([&] { read_sjs_spec(dir / "broken.json"); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("weights serialize by kind") {
  auto t = TableWeights::uniform({1}, {2}, 2);
  t.known[3] = 0;
  const auto j = weights_to_json(WeightFunction{t}, mixed_schema());
  CHECK(j["kind"] == "table");
  CHECK(j["index_names"] == Json::array({"sex"}));
  CHECK(j["cells"].size() == 4);
  CHECK(j["cells"][3]["known"] == false);
}

}

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "shiftscope/data_model.hpp"
#include "shiftscope/estimator.hpp"
#include "shiftscope/synth.hpp"

namespace shiftscope {

using Json = nlohmann::ordered_json;

/// Splits one CSV record; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view text);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

// Schema file:
//   {"columns": [{"name": "age", "kind": "continuous"},
//                {"name": "sex", "kind": "discrete", "categories": ["f", "m"]},
//                {"name": "grade", "kind": "discrete", "cardinality": 4}],
//    "label": {"name": "y", "categories": ["no", "yes"]}}
// Discrete cells are read as category text when categories are listed, or
// as integer levels 1..cardinality otherwise.
Json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const Json& j);
FeatureSchema read_schema(const std::filesystem::path& path);
void write_schema(const FeatureSchema& schema, const std::filesystem::path& path);

/// Reads a CSV with a header naming every schema column. A column named like
/// the label is read as labels when present.
TabularDataset read_dataset(const std::filesystem::path& path, const FeatureSchema& schema);
void write_dataset(const TabularDataset& ds, const std::filesystem::path& path);

Json weights_to_json(const WeightFunction& w, const FeatureSchema& schema);

Json report_to_json(const ShiftReport& report, const FeatureSchema& schema);
ShiftReport report_from_json(const Json& j);

Json sjs_spec_to_json(const SjsSpec& spec);
SjsSpec sjs_spec_from_json(const Json& j);
SjsSpec read_sjs_spec(const std::filesystem::path& path);

Json truth_to_json(const GroundTruth& truth, const FeatureSchema& schema);
/// Reads back Table-valued truth files.
GroundTruth truth_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace shiftscope

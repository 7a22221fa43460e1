#include "shiftscope/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "shiftscope/error.hpp"

namespace shiftscope {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kFileNotFound, "cannot write " + path.string());
  return out;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void bad_row(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": " + what);
}

bool parse_number(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Maps cell text to a level: category lookup or integer 1..card.
class LevelCodec {
 public:
  LevelCodec(const std::vector<std::string>& categories, int cardinality)
      : cardinality_(cardinality) {
    for (std::size_t i = 0; i < categories.size(); ++i) index_[categories[i]] = static_cast<int>(i) + 1;
  }

  int decode(const std::string& text, std::size_t line_no, const std::string& column) const {
    if (!index_.empty()) {
      auto it = index_.find(text);
      if (it == index_.end()) bad_row(line_no, "unknown category '" + text + "' in column '" + column + "'");
      return it->second;
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || v < 1 || v > cardinality_) {
      bad_row(line_no, "level '" + text + "' outside 1.." + std::to_string(cardinality_) + " in column '" +
                           column + "'");
    }
    return v;
  }

  static std::string encode(const std::vector<std::string>& categories, int level) {
    if (!categories.empty()) return categories[static_cast<std::size_t>(level - 1)];
    return std::to_string(level);
  }

 private:
  int cardinality_;
  std::map<std::string, int> index_;
};

std::vector<double> json_doubles(const Json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.is_null() ? std::nan("") : v.get<double>());
  return out;
}

Json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r' || i + 1 != line.size()) {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Json schema_to_json(const FeatureSchema& schema) {
  Json cols = Json::array();
  for (const auto& c : schema.columns) {
    Json jc;
    jc["name"] = c.name;
    if (c.is_discrete()) {
      jc["kind"] = "discrete";
      if (!c.categories.empty()) {
        jc["categories"] = c.categories;
      } else {
        jc["cardinality"] = c.cardinality;
      }
    } else {
      jc["kind"] = "continuous";
    }
    cols.push_back(jc);
  }
  Json label;
  label["name"] = schema.label_name;
  if (!schema.label_categories.empty()) {
    label["categories"] = schema.label_categories;
  } else {
    label["cardinality"] = schema.label_cardinality;
  }
  Json j;
  j["columns"] = cols;
  j["label"] = label;
  return j;
}

FeatureSchema schema_from_json(const Json& j) {
  try {
    FeatureSchema s;
    for (const auto& jc : j.at("columns")) {
      const auto name = jc.at("name").get<std::string>();
      const auto kind = jc.value("kind", std::string("discrete"));
      if (kind == "continuous") {
        s.columns.push_back(Column::continuous(name));
      } else if (kind == "discrete") {
        Column c;
        if (jc.contains("categories")) {
          c = Column::discrete(name, static_cast<int>(jc.at("categories").size()));
          c.categories = jc.at("categories").get<std::vector<std::string>>();
        } else {
          c = Column::discrete(name, jc.at("cardinality").get<int>());
        }
        s.columns.push_back(c);
      } else {
        throw Error(ErrorCode::kInvalidInput, "column '" + name + "' has unknown kind '" + kind + "'");
      }
    }
    const auto& jl = j.at("label");
    s.label_name = jl.value("name", std::string("label"));
    if (jl.contains("categories")) {
      s.label_categories = jl.at("categories").get<std::vector<std::string>>();
      s.label_cardinality = static_cast<int>(s.label_categories.size());
    } else {
      s.label_cardinality = jl.at("cardinality").get<int>();
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("schema: ") + e.what());
  }
}

FeatureSchema read_schema(const std::filesystem::path& path) { return schema_from_json(read_json(path)); }

void write_schema(const FeatureSchema& schema, const std::filesystem::path& path) {
  write_json(schema_to_json(schema), path);
}

TabularDataset read_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  schema.validate();
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedRow, "line 1: missing header");
  const auto header = split_csv_line(trim_cr(line));
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!position.emplace(header[i], i).second) bad_row(1, "duplicate header '" + header[i] + "'");
  }
  std::vector<std::size_t> column_pos;
  for (const auto& c : schema.columns) {
    auto it = position.find(c.name);
    if (it == position.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "column '" + c.name + "' missing from " + path.string());
    }
    column_pos.push_back(it->second);
  }
  std::optional<std::size_t> label_pos;
  if (auto it = position.find(schema.label_name); it != position.end()) label_pos = it->second;

  std::vector<LevelCodec> codecs;
  for (const auto& c : schema.columns) codecs.emplace_back(c.categories, c.cardinality);
  const LevelCodec label_codec(schema.label_categories, schema.label_cardinality);

  TabularDataset ds;
  ds.schema = schema;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      bad_row(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& text = cells[column_pos[i]];
      if (text.empty() || text == "NA" || text == "NaN") bad_row(line_no, "missing value in '" + schema[i].name + "'");
      if (schema[i].is_discrete()) {
        ds.values.push_back(codecs[i].decode(text, line_no, schema[i].name));
      } else {
        double v = 0.0;
        if (!parse_number(text, v) || !std::isfinite(v)) {
          bad_row(line_no, "non-numeric value '" + text + "' in '" + schema[i].name + "'");
        }
        ds.values.push_back(v);
      }
    }
    if (label_pos) {
      const auto& text = cells[*label_pos];
      if (text.empty()) bad_row(line_no, "missing label");
      labels.push_back(label_codec.decode(text, line_no, schema.label_name));
    }
    ++ds.rows;
  }
  if (label_pos) ds.labels = std::move(labels);
  return ds;
}

void write_dataset(const TabularDataset& ds, const std::filesystem::path& path) {
  auto out = open_output(path);
  const auto& s = ds.schema;
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << csv_field(s[i].name);
  if (ds.has_labels()) out << ',' << csv_field(s.label_name);
  out << '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ',';
      if (s[i].is_discrete()) {
        out << csv_field(LevelCodec::encode(s[i].categories, ds.level(r, i)));
      } else {
        out << format_double(ds.at(r, i));
      }
    }
    if (ds.has_labels()) out << ',' << csv_field(LevelCodec::encode(s.label_categories, (*ds.labels)[r]));
    out << '\n';
  }
}

Json weights_to_json(const WeightFunction& w, const FeatureSchema& schema) {
  Json j;
  if (const auto* t = std::get_if<TableWeights>(&w)) {
    j["kind"] = "table";
    j["index_set"] = t->index_set;
    Json names = Json::array();
    for (int i : t->index_set) names.push_back(schema[static_cast<std::size_t>(i)].name);
    j["index_names"] = names;
    j["cardinalities"] = t->cardinalities;
    j["labels"] = t->labels;
    Json cells = Json::array();
    std::vector<int> levels(t->index_set.size());
    const auto L = static_cast<std::size_t>(t->labels);
    for (std::size_t c = 0; c < t->cell_count(); ++c) {
      std::size_t rest = c / L;
      for (std::size_t k = levels.size(); k-- > 0;) {
        const auto card = static_cast<std::size_t>(t->cardinalities[k]);
        levels[k] = static_cast<int>(rest % card) + 1;
        rest /= card;
      }
      Json cell;
      cell["x"] = levels;
      cell["y"] = static_cast<int>(c % L) + 1;
      cell["w"] = json_number(t->weights[c]);
      cell["known"] = t->known[c] != 0;
      cells.push_back(cell);
    }
    j["cells"] = cells;
  } else if (const auto* b = std::get_if<BasisWeights>(&w)) {
    j["kind"] = "basis";
    Json rows = Json::array();
    for (Eigen::Index k = 0; k < b->coefficients.rows(); ++k) {
      const auto& f = (*b->basis)[static_cast<std::size_t>(k)];
      Json row;
      row["feature"] = f.feature;
      row["basis"] = f.kind == BasisFunction::Kind::kIndicator ? "indicator" : "linear";
      if (f.kind == BasisFunction::Kind::kIndicator) {
        row["level"] = f.level;
      } else {
        row["offset"] = json_number(f.offset);
      }
      Json a = Json::array();
      for (Eigen::Index y = 0; y < b->coefficients.cols(); ++y) a.push_back(json_number(b->coefficients(k, y)));
      row["a"] = a;
      rows.push_back(row);
    }
    j["coefficients"] = rows;
  } else if (const auto* kw = std::get_if<KernelWeights>(&w)) {
    j["kind"] = "kernel";
    j["centers"] = kw->centers.rows();
    j["bandwidth"] = json_number(kw->bandwidth);
  } else {
    j["kind"] = "discriminative";
    j["clip"] = json_number(std::get<DiscriminativeWeights>(w).clip);
  }
  return j;
}

Json report_to_json(const ShiftReport& report, const FeatureSchema& schema) {
  Json j;
  j["method"] = std::string(method_name(report.method));
  j["delta_hat"] = json_number(report.delta_hat);
  j["accuracy_drop"] = json_number(report.accuracy_drop());
  j["source_accuracy"] = json_number(report.source_accuracy);
  j["estimated_target_accuracy"] = json_number(report.estimated_target_accuracy);
  j["selected_features"] = report.selected_features;
  Json names = Json::array();
  for (int i : report.selected_features) names.push_back(schema[static_cast<std::size_t>(i)].name);
  j["selected_feature_names"] = names;
  Json diag = Json::object();
  for (const auto& [k, v] : report.diagnostics) diag[k] = json_number(v);
  j["diagnostics"] = diag;
  if (report.weight_metrics) {
    j["weight_metrics"] = {{"mse", json_number(report.weight_metrics->mse)},
                           {"pcc", json_number(report.weight_metrics->pcc)}};
  } else {
    j["weight_metrics"] = nullptr;
  }
  j["warnings"] = report.warnings;
  return j;
}

ShiftReport report_from_json(const Json& j) {
  try {
    ShiftReport r;
    r.method = parse_method(j.at("method").get<std::string>());
    r.delta_hat = j.at("delta_hat").get<double>();
    r.source_accuracy = j.at("source_accuracy").get<double>();
    r.estimated_target_accuracy = j.contains("estimated_target_accuracy")
                                      ? j.at("estimated_target_accuracy").get<double>()
                                      : r.source_accuracy + r.delta_hat;
    r.selected_features = j.at("selected_features").get<std::vector<int>>();
    for (const auto& [k, v] : j.at("diagnostics").items()) {
      r.diagnostics[k] = v.is_null() ? std::nan("") : v.get<double>();
    }
    const auto& wm = j.at("weight_metrics");
    if (!wm.is_null()) r.weight_metrics = WeightMetrics{wm.at("mse").get<double>(), wm.at("pcc").get<double>()};
    if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("report: ") + e.what());
  }
}

Json sjs_spec_to_json(const SjsSpec& spec) {
  Json j;
  j["shifted"] = spec.shifted;
  j["cardinalities"] = spec.cardinalities;
  j["labels"] = spec.labels;
  Json m = Json::array();
  for (double v : spec.marginal) m.push_back(json_number(v));
  j["marginal"] = m;
  j["base"] = spec.base;
  return j;
}

SjsSpec sjs_spec_from_json(const Json& j) {
  try {
    SjsSpec s;
    s.shifted = j.at("shifted").get<std::vector<int>>();
    s.cardinalities = j.at("cardinalities").get<std::vector<int>>();
    s.labels = j.at("labels").get<int>();
    s.marginal = json_doubles(j.at("marginal"));
    s.base = j.value("base", std::string());
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("spec: ") + e.what());
  }
}

SjsSpec read_sjs_spec(const std::filesystem::path& path) { return sjs_spec_from_json(read_json(path)); }

Json truth_to_json(const GroundTruth& truth, const FeatureSchema& schema) {
  Json j;
  j["true_shift_set"] = truth.true_shift_set;
  j["true_weights"] = weights_to_json(truth.true_weights, schema);
  j["true_target_accuracy"] =
      truth.true_target_accuracy ? json_number(*truth.true_target_accuracy) : Json(nullptr);
  return j;
}

GroundTruth truth_from_json(const Json& j) {
  try {
    GroundTruth t;
    t.true_shift_set = j.at("true_shift_set").get<std::vector<int>>();
    const auto& jw = j.at("true_weights");
    if (jw.at("kind") != "table") throw Error(ErrorCode::kInvalidInput, "truth weights must be a table");
    auto w = TableWeights::uniform(jw.at("index_set").get<std::vector<int>>(),
                                   jw.at("cardinalities").get<std::vector<int>>(), jw.at("labels").get<int>());
    const auto& cells = jw.at("cells");
    if (cells.size() != w.cell_count()) throw Error(ErrorCode::kInvalidInput, "truth table has the wrong size");
    for (std::size_t c = 0; c < w.cell_count(); ++c) {
      w.weights[c] = cells[c].at("w").is_null() ? 1.0 : cells[c].at("w").get<double>();
      w.known[c] = cells[c].value("known", true) ? 1 : 0;
    }
    t.true_weights = std::move(w);
    const auto& acc = j.at("true_target_accuracy");
    if (!acc.is_null()) t.true_target_accuracy = acc.get<double>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("truth: ") + e.what());
  }
}

Json read_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace shiftscope

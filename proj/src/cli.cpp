#include "shiftscope/cli.hpp"

#include <fstream>
#include <iostream>

#include "shiftscope/tabulate.hpp"

namespace shiftscope {

namespace {

void emit(const std::string& text, const std::filesystem::path& path) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kFileNotFound, "cannot write " + path.string());
  out << text;
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (path.empty()) throw Error(ErrorCode::kInvalidInput, std::string(what) + " path is empty");
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kFileNotFound, std::string(what) + " file not found: " + path.string());
  }
}

void check_violations(const TabularDataset& ds, const std::string& name) {
  const auto v = validate_dataset(ds);
  if (v.empty()) return;
  std::string msg = name + ": " + v.front().message;
  if (v.front().row) msg += " (row " + std::to_string(*v.front().row + 1) + ")";
  throw Error(ErrorCode::kInvalidInput, msg);
}

}  // namespace

void RunConfig::validate() const {
  if (source_path.empty() || target_path.empty() || schema_path.empty()) {
    throw Error(ErrorCode::kInvalidInput, "source, target and schema paths are required");
  }
  if (sparsity < 0) throw Error(ErrorCode::kInvalidInput, "sparsity must be >= 0");
  if (!(eta >= 0.0)) throw Error(ErrorCode::kInvalidInput, "eta must be >= 0");
  if (bins < 2) throw Error(ErrorCode::kInvalidInput, "bins must be >= 2");
  if (!(weight_bound >= 1.0)) throw Error(ErrorCode::kInvalidInput, "weight bound must be >= 1");
  if (method != "all") parse_method(method);
}

Json cmd_estimate(const RunConfig& cfg) {
  cfg.validate();
  require_file(cfg.schema_path, "schema");
  require_file(cfg.source_path, "source");
  require_file(cfg.target_path, "target");
  const auto schema = read_schema(cfg.schema_path);
  auto source = read_dataset(cfg.source_path, schema);
  auto target = read_dataset(cfg.target_path, schema).without_labels();
  align_schemas(source, target);
  if (!source.has_labels()) {
    throw Error(ErrorCode::kMissingAxis, "source file has no '" + schema.label_name + "' column");
  }
  check_violations(source, "source");
  check_violations(target, "target");

  const auto disc = fit_discretizer(source, cfg.bins);
  source = apply_discretizer(disc, source);
  target = apply_discretizer(disc, target);

  std::vector<std::string> warnings;
  if (cfg.predictions_path || cfg.target_predictions_path) {
    if (!cfg.predictions_path || !cfg.target_predictions_path) {
      throw Error(ErrorCode::kInvalidInput, "source and target prediction files must be given together");
    }
    source = load_predictions(source, *cfg.predictions_path, &warnings);
    target = load_predictions(target, *cfg.target_predictions_path, &warnings);
  } else {
    auto cls = classify(source, {&source, &target});
    source = std::move(cls.data[0]);
    target = std::move(cls.data[1]);
    if (!cls.model.converged) warnings.push_back("classifier did not reach the gradient tolerance");
  }

  std::optional<GroundTruth> truth;
  if (cfg.truth_path) truth = truth_from_json(read_json(*cfg.truth_path));

  std::vector<Method> methods;
  if (cfg.method == "all") {
    methods = {Method::kSeesC, Method::kSeesD, Method::kBbse, Method::kKliep, Method::kDlu};
  } else {
    methods = {parse_method(cfg.method)};
  }
  MethodOptions opts;
  opts.sparsity = cfg.sparsity;
  opts.eta = cfg.eta;
  opts.weight_bound = cfg.weight_bound;
  opts.seed = cfg.seed;
  opts.kliep_iters = cfg.kliep_iters;

  Json reports = Json::array();
  for (Method m : methods) {
    auto run = run_method(m, source, target, opts);
    if (truth) attach_truth(run, source, *truth);
    run.report.warnings.insert(run.report.warnings.begin(), warnings.begin(), warnings.end());
    reports.push_back(report_to_json(run.report, source.schema));
  }
  Json doc = reports.size() == 1 && cfg.method != "all" ? reports[0] : Json{{"method", "all"}, {"reports", reports}};
  emit(doc.dump(2) + "\n", cfg.output_path);
  return doc;
}

AnalyticDistribution builtin_base(const std::string& name) {
  if (name == "covid-analog") return covid_analog_base();
  if (name == "naive-bayes") return sjs_base(6);
  throw Error(ErrorCode::kInvalidInput, "unknown base generator '" + name + "'");
}

SimulateOutputs cmd_simulate(const SimulateConfig& cfg) {
  require_file(cfg.spec_path, "spec");
  if (cfg.out_prefix.empty()) throw Error(ErrorCode::kInvalidInput, "output prefix is required");
  const Json jspec = read_json(cfg.spec_path);
  const SjsSpec target_spec = sjs_spec_from_json(jspec);

  TabularDataset base;
  if (cfg.base_path) {
    if (!cfg.schema_path) throw Error(ErrorCode::kInvalidInput, "a base file needs --schema-path");
    require_file(*cfg.base_path, "base");
    require_file(*cfg.schema_path, "schema");
    base = read_dataset(*cfg.base_path, read_schema(*cfg.schema_path));
    if (!base.has_labels()) throw Error(ErrorCode::kMissingAxis, "base file has no label column");
    check_violations(base, "base");
    if (!base.schema.all_discrete()) throw Error(ErrorCode::kInvalidInput, "base must be all-discrete");
  } else {
    const std::string name = cfg.base_generator.empty() ? target_spec.base : cfg.base_generator;
    base = sample_analytic(builtin_base(name), cfg.base_rows, cfg.seed);
  }
  target_spec.validate(base.schema);

  SjsSpec source_spec = empirical_spec(base, target_spec.shifted);
  if (jspec.contains("source_marginal")) {
    Json js = jspec;
    js["marginal"] = jspec.at("source_marginal");
    source_spec = sjs_spec_from_json(js);
  }
  source_spec.validate(base.schema);

  const auto sc = simulate_pair(std::move(base), source_spec, target_spec,
                                {cfg.n_source, cfg.n_target, cfg.base_rows}, cfg.seed);
  SimulateOutputs out{cfg.out_prefix + "_source.csv", cfg.out_prefix + "_target.csv",
                      cfg.out_prefix + "_schema.json", cfg.out_prefix + "_truth.json"};
  auto strip = [](TabularDataset ds) {
    ds.predictions.reset();
    ds.pred_probs.reset();
    return ds;
  };
  write_dataset(strip(sc.source), out.source);
  write_dataset(strip(sc.target), out.target);
  write_schema(sc.source.schema, out.schema);
  auto truth = truth_to_json(sc.truth, sc.source.schema);
  truth["source_accuracy"] = source_accuracy(sc.source);
  truth["true_delta"] = *sc.truth.true_target_accuracy - source_accuracy(sc.source);
  write_json(truth, out.truth);
  return out;
}

std::vector<BenchRecord> cmd_bench(const BenchConfig& cfg) {
  BenchOptions opts;
  opts.seeds = cfg.seeds;
  opts.first_seed = cfg.first_seed;
  opts.method.kliep_iters = cfg.kliep_iters;
  if (cfg.seeds < 1) throw Error(ErrorCode::kInvalidInput, "seeds must be >= 1");
  auto records = run_suite(parse_suite(cfg.suite), opts);
  if (cfg.output_path == "-") {
    write_bench_csv(records, std::cout);
  } else {
    write_bench_csv(records, cfg.output_path);
  }
  return records;
}

int exit_code_for(ErrorCode code) { return code == ErrorCode::kTrainingFailure ? 1 : 2; }

}  // namespace shiftscope

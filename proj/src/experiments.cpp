#include "shiftscope/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "shiftscope/baselines.hpp"
#include "shiftscope/basis.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/io.hpp"
#include "shiftscope/parallel.hpp"
#include "shiftscope/sees_c.hpp"
#include "shiftscope/sees_d.hpp"

namespace shiftscope {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Target spec: cell (x_I, y) reweighted by exp(label_tilt * [y = 2] +
// sum_k strength_k * s(x_k) * s(y)), with s(level) = -1 for level 1, +1 otherwise.
SjsSpec shifted_spec(const SjsSpec& source, std::span<const double> strengths, double label_tilt) {
  SjsSpec out = source;
  const auto L = static_cast<std::size_t>(source.labels);
  double sum = 0.0;
  for (std::size_t c = 0; c < out.marginal.size(); ++c) {
    const int y = static_cast<int>(c % L) + 1;
    const double sy = y == 1 ? -1.0 : 1.0;
    double e = y == 2 ? label_tilt : 0.0;
    std::size_t rest = c / L;
    for (std::size_t k = source.shifted.size(); k-- > 0;) {
      const auto card = static_cast<std::size_t>(source.cardinalities[k]);
      const double sx = rest % card == 0 ? -1.0 : 1.0;
      e += strengths[k] * sx * sy;
      rest /= card;
    }
    out.marginal[c] *= std::exp(e);
    sum += out.marginal[c];
  }
  for (double& m : out.marginal) m /= sum;
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

MethodRun run_method(Method method, const TabularDataset& source, const TabularDataset& target,
                     const MethodOptions& opts) {
  WeightFunction weights;
  Diagnostics diag;
  switch (method) {
    case Method::kSeesD: {
      SeesDConfig cfg;
      cfg.sparsity = opts.sparsity;
      cfg.weight_bound = opts.weight_bound;
      cfg.parallel = opts.parallel;
      auto r = run_sees_d(source, target, cfg);
      weights = std::move(r.weights);
      diag = std::move(r.diagnostics);
      break;
    }
    case Method::kSeesC: {
      SeesCConfig cfg;
      cfg.eta = opts.eta;
      auto basis = std::make_shared<const BasisSet>(default_basis(source.schema, &source));
      auto r = run_sees_c(source, target, basis, cfg);
      weights = std::move(r.weights);
      diag = std::move(r.diagnostics);
      break;
    }
    case Method::kBbse: {
      auto r = run_bbse(source, target);
      weights = std::move(r.weights);
      diag = std::move(r.diagnostics);
      break;
    }
    case Method::kKliep: {
      KliepConfig cfg;
      cfg.max_iters = opts.kliep_iters;
      cfg.centers = opts.kliep_centers;
      cfg.seed = opts.seed;
      auto r = run_kliep(source, target, cfg);
      weights = std::move(r.weights);
      diag = std::move(r.diagnostics);
      break;
    }
    case Method::kDlu: {
      auto r = run_dlu(source, target);
      weights = std::move(r.weights);
      diag = std::move(r.diagnostics);
      break;
    }
  }
  MethodRun run{make_report(method, source, weights, opts.sparsity, std::move(diag)), std::move(weights)};
  return run;
}

void attach_truth(MethodRun& run, const TabularDataset& source, const GroundTruth& truth) {
  run.report.weight_metrics = score_weights(run.weights, truth, source, &run.report.warnings);
  if (truth.true_target_accuracy) {
    run.report.diagnostics["gap_squared_error"] =
        score_gap(run.report.delta_hat, run.report.source_accuracy, truth);
    run.report.diagnostics["true_delta"] = *truth.true_target_accuracy - run.report.source_accuracy;
  }
}

Classified classify(const TabularDataset& train, const std::vector<const TabularDataset*>& apply) {
  Classified out;
  out.model = train_logistic(train);
  for (const auto* ds : apply) out.data.push_back(predict(out.model, *ds));
  return out;
}

Scenario simulate_pair(TabularDataset base, const SjsSpec& source_spec, const SjsSpec& target_spec,
                       const SimulationSizes& sizes, std::uint64_t seed) {
  auto src = apply_sjs(base, source_spec, sizes.source_rows, mix_seed(seed, 1));
  auto tgt = apply_sjs(base, target_spec, sizes.target_rows, mix_seed(seed, 2));
  auto cls = classify(src.data, {&src.data, &tgt.data, &base});

  Scenario sc;
  sc.source = std::move(cls.data[0]);
  sc.target = std::move(cls.data[1]);
  sc.base = std::move(cls.data[2]);
  sc.truth.true_weights = spec_ratio(target_spec, source_spec);
  sc.truth.true_shift_set = target_spec.shifted;

  // Population accuracy under the target: per-cell base accuracy weighted by q.
  const auto& tw = std::get<TableWeights>(sc.truth.true_weights);
  std::vector<double> hits(tw.cell_count(), 0.0), members(tw.cell_count(), 0.0);
  for (std::size_t r = 0; r < sc.base.size(); ++r) {
    const int y = (*sc.base.labels)[r];
    const auto c = tw.cell_of_row(sc.base.row(r), y);
    members[c] += 1.0;
    hits[c] += (*sc.base.predictions)[r] == y ? 1.0 : 0.0;
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < tw.cell_count(); ++c) {
    if (target_spec.marginal[c] > 0.0) acc += target_spec.marginal[c] * hits[c] / members[c];
  }
  sc.truth.true_target_accuracy = acc;
  return sc;
}

Scenario simulate_pair(const AnalyticDistribution& dist, const SjsSpec& source_spec,
                       const SjsSpec& target_spec, const SimulationSizes& sizes, std::uint64_t seed) {
  return simulate_pair(sample_analytic(dist, sizes.base_rows, mix_seed(seed, 0)), source_spec, target_spec,
                       sizes, seed);
}

std::string_view shift_kind_name(ShiftKind k) {
  switch (k) {
    case ShiftKind::kLabel: return "label";
    case ShiftKind::kCovariate: return "covariate";
    case ShiftKind::kJoint: return "joint";
  }
  return "unknown";
}

SjsSpec covid_source_spec() {
  SjsSpec s;
  s.shifted = {0};
  s.cardinalities = {2};
  s.labels = 2;
  // (young, neg), (young, pos), (aged, neg), (aged, pos)
  s.marginal = {0.3, 0.2, 0.3, 0.2};
  s.base = "covid-analog";
  return s;
}

SjsSpec covid_target_spec() {
  SjsSpec s = covid_source_spec();
  s.marginal = {0.25, 0.25, 0.1, 0.4};
  return s;
}

Scenario covid_scenario(ShiftKind kind, const SimulationSizes& sizes, std::uint64_t seed) {
  SjsSpec src = covid_source_spec();
  SjsSpec tgt = covid_target_spec();
  if (kind == ShiftKind::kLabel) {
    src.shifted.clear();
    src.cardinalities.clear();
    src.marginal = {0.6, 0.4};
    tgt = src;
    tgt.marginal = {0.35, 0.65};
  } else if (kind == ShiftKind::kCovariate) {
    tgt.marginal = {0.21, 0.14, 0.39, 0.26};
  }
  auto sc = simulate_pair(covid_analog_base(), src, tgt, sizes, seed);
  sc.name = "covid-" + std::string(shift_kind_name(kind));
  return sc;
}

AnalyticDistribution sjs_base(int d) {
  std::vector<Rational> prior = {Rational(1, 2), Rational(1, 2)};
  std::vector<std::vector<Rational>> on(static_cast<std::size_t>(d), {Rational(30, 100), Rational(65, 100)});
  return naive_bayes(prior, on);
}

Scenario sjs_scenario(int d, std::vector<int> shifted, const SimulationSizes& sizes, std::uint64_t seed) {
  static const double kStrengths[] = {0.9, 0.6, 0.2, 0.1, 0.05};
  std::sort(shifted.begin(), shifted.end());
  const auto dist = sjs_base(d);
  const auto src = analytic_spec(dist, shifted);
  std::vector<double> strengths(shifted.size());
  for (std::size_t k = 0; k < shifted.size(); ++k) strengths[k] = kStrengths[std::min<std::size_t>(k, 4)];
  const auto tgt = shifted_spec(src, strengths, 0.6);
  auto sc = simulate_pair(dist, src, tgt, sizes, seed);
  sc.name = "sjs-d" + std::to_string(d) + "-s" + std::to_string(shifted.size());
  return sc;
}

Suite parse_suite(std::string_view name) {
  if (name == "tradeoff") return Suite::kTradeoff;
  if (name == "sparsity") return Suite::kSparsity;
  if (name == "robustness") return Suite::kRobustness;
  if (name == "sensitivity") return Suite::kSensitivity;
  throw Error(ErrorCode::kInvalidInput, "unknown suite '" + std::string(name) + "'");
}

std::string_view suite_name(Suite s) {
  switch (s) {
    case Suite::kTradeoff: return "tradeoff";
    case Suite::kSparsity: return "sparsity";
    case Suite::kRobustness: return "robustness";
    case Suite::kSensitivity: return "sensitivity";
  }
  return "unknown";
}

namespace {

BenchRecord evaluate(const std::string& suite, const std::string& setting, std::uint64_t seed, Method m,
                     const Scenario& sc, MethodOptions opts) {
  BenchRecord rec;
  rec.suite = suite;
  rec.setting = setting;
  rec.seed = seed;
  rec.method = m;
  rec.sparsity = opts.sparsity;
  opts.seed = seed;
  try {
    auto run = run_method(m, sc.source, sc.target, opts);
    attach_truth(run, sc.source, sc.truth);
    rec.delta_hat = run.report.delta_hat;
    rec.delta_true = run.report.diagnostics.at("true_delta");
    rec.gap_error = run.report.diagnostics.at("gap_squared_error");
    rec.weight_mse = run.report.weight_metrics->mse;
    rec.weight_pcc = run.report.weight_metrics->pcc;
    auto truth_set = sc.truth.true_shift_set;
    std::sort(truth_set.begin(), truth_set.end());
    rec.recovered = run.report.selected_features == truth_set;
    rec.selected = join_ints(run.report.selected_features);
  } catch (const Error& e) {
    rec.delta_hat = rec.delta_true = rec.gap_error = rec.weight_mse = rec.weight_pcc = kNaN;
    rec.error = std::string(e.category());
  }
  return rec;
}

std::vector<BenchRecord> run_seed(Suite suite, std::uint64_t seed, const BenchOptions& opts) {
  std::vector<BenchRecord> out;
  const std::string name(suite_name(suite));
  MethodOptions mo = opts.method;
  mo.parallel = false;
  switch (suite) {
    case Suite::kTradeoff: {
      for (std::size_t n : {2500u, 5000u, 10000u, 20000u, 40000u}) {
        SimulationSizes sizes{n, n, 50000};
        const auto sc = sjs_scenario(6, {static_cast<int>(seed % 6)}, sizes, seed);
        mo.sparsity = 1;
        for (Method m : opts.methods) out.push_back(evaluate(name, "n=" + std::to_string(n), seed, m, sc, mo));
      }
      break;
    }
    case Suite::kSparsity: {
      const std::vector<int> pool = {1, 3, 5};
      for (int s = 0; s <= 3; ++s) {
        const auto sc = sjs_scenario(7, std::vector<int>(pool.begin(), pool.begin() + s), {}, seed);
        mo.sparsity = s;
        for (Method m : opts.methods) out.push_back(evaluate(name, "s=" + std::to_string(s), seed, m, sc, mo));
      }
      break;
    }
    case Suite::kRobustness: {
      for (ShiftKind k : {ShiftKind::kLabel, ShiftKind::kCovariate, ShiftKind::kJoint}) {
        const auto sc = covid_scenario(k, {}, seed);
        mo.sparsity = 1;
        for (Method m : opts.methods) out.push_back(evaluate(name, std::string(shift_kind_name(k)), seed, m, sc, mo));
      }
      break;
    }
    case Suite::kSensitivity: {
      const auto sc = sjs_scenario(7, {1, 3, 5}, {}, seed);
      for (int s = 0; s <= 7; ++s) {
        mo.sparsity = s;
        for (Method m : opts.methods) {
          if (m != Method::kSeesD && m != Method::kSeesC) continue;
          out.push_back(evaluate(name, "s=" + std::to_string(s), seed, m, sc, mo));
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<BenchRecord> run_suite(Suite suite, const BenchOptions& opts) {
  std::vector<std::vector<BenchRecord>> per_seed(static_cast<std::size_t>(std::max(opts.seeds, 0)));
  parallel_for(
      per_seed.size(),
      [&](std::size_t i) { per_seed[i] = run_seed(suite, opts.first_seed + i, opts); }, opts.parallel);
  std::vector<BenchRecord> out;
  for (auto& v : per_seed) out.insert(out.end(), v.begin(), v.end());
  return out;
}

double mean_of(const std::vector<BenchRecord>& records, const std::string& setting, Method method,
               double BenchRecord::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.setting != setting || r.method != method || std::isnan(r.*field)) continue;
    sum += r.*field;
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kFileNotFound, "cannot write " + path.string());
  write_bench_csv(records, out);
}

void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
  auto num = [](double v) { return std::isnan(v) ? std::string("nan") : format_double(v); };
  out << "suite,setting,seed,method,sparsity,delta_hat,delta_true,gap_error,weight_mse,weight_pcc,recovered,"
         "selected,error\n";
  for (const auto& r : records) {
    out << r.suite << ',' << r.setting << ',' << r.seed << ',' << method_name(r.method) << ',' << r.sparsity
        << ',' << num(r.delta_hat) << ',' << num(r.delta_true) << ',' << num(r.gap_error) << ','
        << num(r.weight_mse) << ',' << num(r.weight_pcc) << ',' << (r.recovered ? 1 : 0) << ','
        << csv_field(r.selected) << ',' << r.error << '\n';
  }
  // Means per (setting, method), in first-appearance order.
  std::vector<std::pair<std::string, Method>> keys;
  for (const auto& r : records) {
    std::pair<std::string, Method> k{r.setting, r.method};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [setting, m] : keys) {
    const BenchRecord* first = nullptr;
    double recovered = 0.0, count = 0.0;
    for (const auto& r : records) {
      if (r.setting != setting || r.method != m) continue;
      if (first == nullptr) first = &r;
      recovered += r.recovered ? 1.0 : 0.0;
      count += 1.0;
    }
    out << first->suite << ',' << setting << ",mean," << method_name(m) << ',' << first->sparsity << ','
        << num(mean_of(records, setting, m, &BenchRecord::delta_hat)) << ','
        << num(mean_of(records, setting, m, &BenchRecord::delta_true)) << ','
        << num(mean_of(records, setting, m, &BenchRecord::gap_error)) << ','
        << num(mean_of(records, setting, m, &BenchRecord::weight_mse)) << ','
        << num(mean_of(records, setting, m, &BenchRecord::weight_pcc)) << ',' << num(recovered / count)
        << ",,\n";
  }
}

}  // namespace shiftscope

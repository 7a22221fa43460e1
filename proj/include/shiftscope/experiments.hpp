#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shiftscope/estimator.hpp"
#include "shiftscope/predictor.hpp"
#include "shiftscope/synth.hpp"

namespace shiftscope {

struct MethodOptions {
  int sparsity = 1;
  double eta = 1e-3;
  double weight_bound = 20.0;
  int kliep_iters = 2500;
  int kliep_centers = 100;
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct MethodRun {
  ShiftReport report;
  WeightFunction weights;
};

/// Fits one estimator. `source` needs labels, predictions and probabilities;
/// `target` needs predictions (its labels, if any, are not read).
MethodRun run_method(Method method, const TabularDataset& source, const TabularDataset& target,
                     const MethodOptions& opts);

/// Adds weight metrics and the squared gap error (diagnostic
/// "gap_squared_error") when the truth allows it.
void attach_truth(MethodRun& run, const TabularDataset& source, const GroundTruth& truth);

/// Logistic classifier trained on `train`, applied to each dataset.
struct Classified {
  LogisticModel model;
  std::vector<TabularDataset> data;
};
Classified classify(const TabularDataset& train, const std::vector<const TabularDataset*>& apply);

/// Source and target drawn from one base by two specs over the same I.
/// Target labels are kept for evaluation only.
struct Scenario {
  std::string name;
  TabularDataset base;
  TabularDataset source;
  TabularDataset target;
  GroundTruth truth;
};

struct SimulationSizes {
  std::size_t source_rows = 10000;
  std::size_t target_rows = 10000;
  std::size_t base_rows = 50000;
};

/// Samples a base from `dist` and resamples it by both specs; trains the
/// classifier on the source. The true target accuracy is the spec-weighted
/// per-cell accuracy over the base.
Scenario simulate_pair(const AnalyticDistribution& dist, const SjsSpec& source_spec,
                       const SjsSpec& target_spec, const SimulationSizes& sizes, std::uint64_t seed);

/// Same, over an existing labeled base.
Scenario simulate_pair(TabularDataset base, const SjsSpec& source_spec, const SjsSpec& target_spec,
                       const SimulationSizes& sizes, std::uint64_t seed);

// Bundled scenario families.
enum class ShiftKind { kLabel, kCovariate, kJoint };
std::string_view shift_kind_name(ShiftKind k);

/// Covid-analog pair: positive rate 40% in both age groups on the source; on
/// the target 80% among aged and 50% among young (joint), the same label
/// marginal without the age dependence (label), or 65% aged with p(y | aged)
/// kept (covariate).
Scenario covid_scenario(ShiftKind kind, const SimulationSizes& sizes, std::uint64_t seed);
SjsSpec covid_source_spec();
SjsSpec covid_target_spec();

/// d binary naive-Bayes features, true_s of them shifted jointly with the
/// label. Shift strengths decrease along `shifted`.
Scenario sjs_scenario(int d, std::vector<int> shifted, const SimulationSizes& sizes, std::uint64_t seed);
AnalyticDistribution sjs_base(int d);

// Benchmark suites.
enum class Suite { kTradeoff, kSparsity, kRobustness, kSensitivity };
Suite parse_suite(std::string_view name);
std::string_view suite_name(Suite s);

struct BenchRecord {
  std::string suite;
  std::string setting;
  std::uint64_t seed = 0;
  Method method = Method::kSeesD;
  int sparsity = 1;
  double delta_hat = 0.0;
  double delta_true = 0.0;
  double gap_error = 0.0;
  double weight_mse = 0.0;
  double weight_pcc = 0.0;
  bool recovered = false;
  std::string selected;
  std::string error;
};

struct BenchOptions {
  int seeds = 20;
  std::uint64_t first_seed = 1;
  std::vector<Method> methods = {Method::kSeesC, Method::kSeesD, Method::kBbse, Method::kKliep, Method::kDlu};
  MethodOptions method;
  bool parallel = true;
};

std::vector<BenchRecord> run_suite(Suite suite, const BenchOptions& opts);

/// Per-run rows followed by per-(setting, method) means.
void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out);

/// Mean of `field` over records matching setting and method (NaN rows skipped).
double mean_of(const std::vector<BenchRecord>& records, const std::string& setting, Method method,
               double BenchRecord::*field);

}  // namespace shiftscope

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "shiftscope/error.hpp"
#include "shiftscope/experiments.hpp"
#include "shiftscope/io.hpp"

namespace shiftscope {

struct RunConfig {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  std::filesystem::path schema_path;
  std::string method = "sees-d";  // or "all"
  int sparsity = 1;
  double eta = 1e-3;
  int bins = 5;
  double weight_bound = 20.0;
  std::uint64_t seed = 0;
  int kliep_iters = 2500;
  std::optional<std::filesystem::path> predictions_path;
  std::optional<std::filesystem::path> target_predictions_path;
  std::optional<std::filesystem::path> truth_path;
  // "-" writes to stdout.
  std::filesystem::path output_path = "-";

  void validate() const;
};

struct SimulateConfig {
  std::filesystem::path spec_path;
  std::optional<std::filesystem::path> base_path;
  std::optional<std::filesystem::path> schema_path;
  // Used when no base file is given; defaults to the spec's "base" field.
  std::string base_generator;
  std::size_t base_rows = 50000;
  std::size_t n_source = 10000;
  std::size_t n_target = 10000;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

struct BenchConfig {
  std::string suite;
  int seeds = 20;
  std::uint64_t first_seed = 1;
  int kliep_iters = 2500;
  std::filesystem::path output_path = "-";
};

/// Runs the estimate pipeline and returns the report document.
Json cmd_estimate(const RunConfig& cfg);

struct SimulateOutputs {
  std::filesystem::path source, target, schema, truth;
};
SimulateOutputs cmd_simulate(const SimulateConfig& cfg);

std::vector<BenchRecord> cmd_bench(const BenchConfig& cfg);

/// 2 for input errors, 1 for internal failures.
int exit_code_for(ErrorCode code);

/// Built-in bases usable by simulate: "covid-analog", "naive-bayes".
AnalyticDistribution builtin_base(const std::string& name);

}  // namespace shiftscope

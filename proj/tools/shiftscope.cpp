#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "shiftscope/cli.hpp"

int main(int argc, char** argv) {
  using namespace shiftscope;
  CLI::App app{"shiftscope: estimate model performance change under sparse joint shift"};
  app.require_subcommand(1);

  RunConfig run;
  std::string source, target, schema, output = "-", preds, tpreds, truth;
  auto* est = app.add_subcommand("estimate", "Estimate the accuracy change from source to target");
  est->add_option("--source-path", source, "Labeled source CSV")->required();
  est->add_option("--target-path", target, "Unlabeled target CSV")->required();
  est->add_option("--schema-path", schema, "Schema JSON")->required();
  est->add_option("--method", run.method, "sees-c|sees-d|bbse|kliep|dlu|all")->capture_default_str();
  est->add_option("--sparsity", run.sparsity, "Shift sparsity s")->capture_default_str();
  est->add_option("--eta", run.eta, "SEES-c group penalty")->capture_default_str();
  est->add_option("--bins", run.bins, "Bins for continuous columns")->capture_default_str();
  est->add_option("--weight-bound", run.weight_bound, "SEES-d weight bound M")->capture_default_str();
  est->add_option("--seed", run.seed, "Seed")->capture_default_str();
  est->add_option("--kliep-iters", run.kliep_iters, "KLIEP iterations")->capture_default_str();
  est->add_option("--predictions-path", preds, "Source predictions CSV (pred,p_1..p_L)");
  est->add_option("--target-predictions-path", tpreds, "Target predictions CSV");
  est->add_option("--truth-path", truth, "Truth JSON from simulate, for scoring");
  est->add_option("--output-path", output, "Report path, - for stdout")->capture_default_str();

  SimulateConfig sim;
  std::string spec, base, base_schema;
  std::size_t n = 0;
  auto* simc = app.add_subcommand("simulate", "Draw a source/target pair under a sparse joint shift");
  simc->add_option("--spec-path", spec, "Shift spec JSON")->required();
  simc->add_option("--base-path", base, "Labeled base CSV");
  simc->add_option("--schema-path", base_schema, "Schema of the base CSV");
  simc->add_option("--base-generator", sim.base_generator, "covid-analog|naive-bayes");
  simc->add_option("--base-rows", sim.base_rows, "Rows drawn from a generator base")->capture_default_str();
  simc->add_option("--n", n, "Rows per side (sets both sizes)");
  simc->add_option("--n-source", sim.n_source, "Source rows")->capture_default_str();
  simc->add_option("--n-target", sim.n_target, "Target rows")->capture_default_str();
  simc->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  simc->add_option("--out-prefix", sim.out_prefix, "Output prefix")->required();

  BenchConfig bench;
  std::string bench_out = "-";
  auto* benc = app.add_subcommand("bench", "Run a benchmark suite on bundled synthetic bases");
  benc->add_option("--suite", bench.suite, "tradeoff|sparsity|robustness|sensitivity")->required();
  benc->add_option("--seeds", bench.seeds, "Runs per cell")->capture_default_str();
  benc->add_option("--first-seed", bench.first_seed, "First seed")->capture_default_str();
  benc->add_option("--kliep-iters", bench.kliep_iters, "KLIEP iterations")->capture_default_str();
  benc->add_option("--output-path", bench_out, "CSV path, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "INVALID_INPUT: " << e.what() << "\n";
    return 2;
  }

  try {
    if (est->parsed()) {
      run.source_path = source;
      run.target_path = target;
      run.schema_path = schema;
      run.output_path = output;
      if (!preds.empty()) run.predictions_path = preds;
      if (!tpreds.empty()) run.target_predictions_path = tpreds;
      if (!truth.empty()) run.truth_path = truth;
      cmd_estimate(run);
    } else if (simc->parsed()) {
      sim.spec_path = spec;
      if (!base.empty()) sim.base_path = base;
      if (!base_schema.empty()) sim.schema_path = base_schema;
      if (n > 0) sim.n_source = sim.n_target = n;
      const auto out = cmd_simulate(sim);
      std::cout << out.source.string() << "\n" << out.target.string() << "\n" << out.schema.string() << "\n"
                << out.truth.string() << "\n";
    } else if (benc->parsed()) {
      bench.output_path = bench_out;
      cmd_bench(bench);
    }
  } catch (const Error& e) {
    std::cerr << e.category() << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

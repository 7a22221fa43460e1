#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftscope/data_model.hpp"
#include "shiftscope/weights.hpp"

namespace shiftscope {

enum class Method { kSeesC, kSeesD, kBbse, kKliep, kDlu };

std::string_view method_name(Method m);
/// Accepts "sees-c", "SEES-c", "bbse", ... Throws kInvalidInput otherwise.
Method parse_method(std::string_view name);

enum class Loss { kZeroOne };

struct WeightMetrics {
  double mse = 0.0;
  double pcc = 0.0;
  // Either side had zero variance; pcc is reported as 0.
  bool pcc_degenerate = false;
};

/// Ground truth for simulated shifts.
struct GroundTruth {
  WeightFunction true_weights;
  std::vector<int> true_shift_set;
  std::optional<double> true_target_accuracy;
};

struct ShiftReport {
  Method method = Method::kSeesD;
  // Estimated accuracy change, target minus source.
  double delta_hat = 0.0;
  double source_accuracy = 0.0;
  double estimated_target_accuracy = 0.0;
  std::vector<int> selected_features;
  Diagnostics diagnostics;
  std::optional<WeightMetrics> weight_metrics;
  std::vector<std::string> warnings;

  double accuracy_drop() const { return -delta_hat; }
};

/// Fraction of source rows with f(x) = y.
double source_accuracy(const TabularDataset& source);

/// (1/n_P) sum_i (w(x_i, y_i) - 1) 1{f(x_i) = y_i}.
double estimate_gap(const TabularDataset& source, const WeightFunction& w, Loss loss = Loss::kZeroOne);
/// Same reduction over precomputed per-row weights.
double estimate_gap(const TabularDataset& source, std::span<const double> weights);

/// Table weights report their index set; basis weights the top-s features by
/// group norm (ties to the lower index); feature-only baselines report none.
std::vector<int> select_features(const WeightFunction& w, int s);
std::vector<int> top_features(std::span<const double> scores, int s);

/// MSE and Pearson correlation of estimated vs true weights over labeled rows.
WeightMetrics score_weights(const WeightFunction& w, const GroundTruth& truth,
                            const TabularDataset& eval_points,
                            std::vector<std::string>* warnings = nullptr);
WeightMetrics score_weights(std::span<const double> estimated, std::span<const double> truth,
                            std::vector<std::string>* warnings = nullptr);

/// (delta_hat - (true_target_accuracy - source_accuracy))^2. Throws
/// kMissingTruth when the target accuracy is unknown.
double score_gap(double delta_hat, double source_accuracy, const GroundTruth& truth);

/// Fills delta_hat, accuracies and selected features for fitted weights.
ShiftReport make_report(Method method, const TabularDataset& source, const WeightFunction& w,
                        int sparsity, Diagnostics diagnostics);

}  // namespace shiftscope

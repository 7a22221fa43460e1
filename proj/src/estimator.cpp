#include "shiftscope/estimator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "shiftscope/error.hpp"
#include "shiftscope/sees_c.hpp"

namespace shiftscope {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kSeesC: return "SEES-c";
    case Method::kSeesD: return "SEES-d";
    case Method::kBbse: return "BBSE";
    case Method::kKliep: return "KLIEP";
    case Method::kDlu: return "DLU";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sees-c") return Method::kSeesC;
  if (lower == "sees-d") return Method::kSeesD;
  if (lower == "bbse") return Method::kBbse;
  if (lower == "kliep") return Method::kKliep;
  if (lower == "dlu") return Method::kDlu;
  throw Error(ErrorCode::kInvalidInput, "unknown method '" + std::string(name) + "'");
}

double source_accuracy(const TabularDataset& source) {
  if (!source.has_labels() || !source.has_predictions()) {
    throw Error(ErrorCode::kMissingAxis, "source needs labels and predictions");
  }
  if (source.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < source.size(); ++r) {
    correct += (*source.labels)[r] == (*source.predictions)[r] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(source.size());
}

double estimate_gap(const TabularDataset& source, std::span<const double> weights) {
  if (!source.has_labels() || !source.has_predictions()) {
    throw Error(ErrorCode::kMissingAxis, "source needs labels and predictions");
  }
  if (source.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < source.size(); ++r) {
    if ((*source.labels)[r] == (*source.predictions)[r]) sum += weights[r] - 1.0;
  }
  return sum / static_cast<double>(source.size());
}

double estimate_gap(const TabularDataset& source, const WeightFunction& w, Loss) {
  const auto eval = evaluate_weights(w, source);
  return estimate_gap(source, eval.values);
}

std::vector<int> top_features(std::span<const double> scores, int s) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(s, 0))));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<int> select_features(const WeightFunction& w, int s) {
  if (const auto* t = std::get_if<TableWeights>(&w)) return t->index_set;
  if (const auto* b = std::get_if<BasisWeights>(&w)) {
    return top_features(feature_scores(b->coefficients, *b->basis), s);
  }
  return {};
}

WeightMetrics score_weights(std::span<const double> estimated, std::span<const double> truth,
                            std::vector<std::string>* warnings) {
  WeightMetrics m;
  const std::size_t n = estimated.size();
  if (n == 0) return m;
  double me = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m.mse += (estimated[i] - truth[i]) * (estimated[i] - truth[i]);
    me += estimated[i];
    mt += truth[i];
  }
  m.mse /= static_cast<double>(n);
  me /= static_cast<double>(n);
  mt /= static_cast<double>(n);
  double se = 0.0, st = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    se += (estimated[i] - me) * (estimated[i] - me);
    st += (truth[i] - mt) * (truth[i] - mt);
    cross += (estimated[i] - me) * (truth[i] - mt);
  }
  // Relative check: a constant vector can pick up rounding noise in its variance.
  const double tiny = 1e-24 * static_cast<double>(n);
  if (se <= tiny * std::max(1.0, me * me) || st <= tiny * std::max(1.0, mt * mt)) {
    m.pcc = 0.0;
    m.pcc_degenerate = true;
    if (warnings != nullptr) warnings->push_back("pcc undefined: zero-variance weights, reported as 0");
  } else {
    m.pcc = cross / std::sqrt(se * st);
  }
  return m;
}

WeightMetrics score_weights(const WeightFunction& w, const GroundTruth& truth,
                            const TabularDataset& eval_points, std::vector<std::string>* warnings) {
  const auto est = evaluate_weights(w, eval_points);
  const auto ref = evaluate_weights(truth.true_weights, eval_points);
  return score_weights(est.values, ref.values, warnings);
}

double score_gap(double delta_hat, double source_accuracy, const GroundTruth& truth) {
  if (!truth.true_target_accuracy) {
    throw Error(ErrorCode::kMissingTruth, "ground truth lacks the target accuracy");
  }
  const double delta_true = *truth.true_target_accuracy - source_accuracy;
  return (delta_hat - delta_true) * (delta_hat - delta_true);
}

ShiftReport make_report(Method method, const TabularDataset& source, const WeightFunction& w,
                        int sparsity, Diagnostics diagnostics) {
  ShiftReport r;
  r.method = method;
  const auto eval = evaluate_weights(w, source);
  r.source_accuracy = source_accuracy(source);
  r.delta_hat = estimate_gap(source, eval.values);
  r.estimated_target_accuracy = r.source_accuracy + r.delta_hat;
  r.selected_features = select_features(w, sparsity);
  r.diagnostics = std::move(diagnostics);
  r.diagnostics["unseen_cell_rows"] = static_cast<double>(eval.fallback_count);
  const double mean = eval.values.empty()
                          ? 1.0
                          : std::accumulate(eval.values.begin(), eval.values.end(), 0.0) /
                                static_cast<double>(eval.values.size());
  r.diagnostics["source_weight_mean"] = mean;
  const double hi = eval.values.empty() ? 1.0 : *std::max_element(eval.values.begin(), eval.values.end());
  if (r.delta_hat < -r.source_accuracy - 1e-9 || r.delta_hat > std::max(hi, 1.0) - 1.0 + 1e-9) {
    r.warnings.push_back("estimated gap outside its weight-implied bounds");
  }
  return r;
}

}  // namespace shiftscope

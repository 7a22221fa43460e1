#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shiftscope/data_model.hpp"

namespace shiftscope {

/// Maps a row to a numeric design vector: one-hot discrete levels (optionally
/// dropping level 1) and standardized continuous values.
class Featurizer {
 public:
  Featurizer() = default;
  static Featurizer fit(const TabularDataset& sample, bool drop_first);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t width() const { return width_; }
  void transform_row(std::span<const double> row, std::span<double> out) const;
  Eigen::MatrixXd transform(const TabularDataset& ds) const;

 private:
  FeatureSchema schema_;
  bool drop_first_ = true;
  std::vector<std::size_t> offsets_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::size_t width_ = 0;
};

/// Multinomial logistic regression; coefficients are (width + 1) x L with the
/// intercept in the last row.
struct LogisticModel {
  Featurizer featurizer;
  Eigen::MatrixXd coef;
  double l2_lambda = 1e-4;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;

  int classes() const { return static_cast<int>(coef.cols()); }
  /// Row-stochastic n x L matrix.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& design) const;
};

/// Weighted training rows in design space; labels are 0-based here.
struct LogisticProblem {
  Eigen::MatrixXd design;
  std::vector<int> labels;
  Eigen::VectorXd weights;  // sums to 1
  int classes = 2;
};

/// Collapses duplicate (row, label) pairs into weights.
LogisticProblem make_logistic_problem(const Eigen::MatrixXd& design, std::span<const int> labels_1based,
                                      int classes);

/// Mean weighted cross-entropy plus (lambda/2)|W|^2 over non-intercept rows.
double logistic_objective(const LogisticProblem& problem, const Eigen::MatrixXd& coef,
                          double l2_lambda, Eigen::MatrixXd* gradient);

LogisticModel train_logistic(const TabularDataset& ds, double l2_lambda = 1e-4,
                             int max_iters = 2000);

/// Fills predictions (argmax, lowest class on ties) and pred_probs.
TabularDataset predict(const LogisticModel& model, const TabularDataset& ds);

/// Attaches predictions from a CSV with header `pred,p_1,...,p_L`. Rows whose
/// probabilities do not sum to 1 within 1e-6 are renormalized and reported in
/// `warnings`.
TabularDataset load_predictions(const TabularDataset& ds, const std::filesystem::path& path,
                                std::vector<std::string>* warnings = nullptr);

void write_predictions(const TabularDataset& ds, const std::filesystem::path& path);

}  // namespace shiftscope

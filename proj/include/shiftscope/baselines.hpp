#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "shiftscope/data_model.hpp"
#include "shiftscope/tabulate.hpp"
#include "shiftscope/weights.hpp"

namespace shiftscope {

struct BaselineResult {
  WeightFunction weights;
  Diagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// BBSE: black-box label-shift estimation from the hard-prediction confusion
// matrix. Solves C w = mu with C[f, y] = p(f(x) = f, y) on the source and
// mu[f] = q(f(x) = f) on the target.
// ---------------------------------------------------------------------------

/// Condition numbers above this are treated as singular.
inline constexpr double kMaxConfusionCondition = 1e12;

struct BbseFit {
  Eigen::MatrixXd confusion;
  Eigen::VectorXd target_pred_marginal;
  Eigen::VectorXd class_weights;
  double condition_number = 0.0;
  int clipped_classes = 0;
};

BbseFit fit_bbse(const MarginalSource& source, const MarginalSource& target);
BaselineResult run_bbse(const MarginalSource& source, const MarginalSource& target);
BaselineResult run_bbse(const TabularDataset& source, const TabularDataset& target);

// ---------------------------------------------------------------------------
// KLIEP: Gaussian-kernel density-ratio fit under the covariate-shift
// assumption; the weights ignore y.
// ---------------------------------------------------------------------------

struct KliepConfig {
  int centers = 100;
  int max_iters = 2500;
  int bandwidth_sample = 1000;
  double step_size = 0.1;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

BaselineResult run_kliep(const TabularDataset& source, const TabularDataset& target,
                         const KliepConfig& cfg = {});

// ---------------------------------------------------------------------------
// DLU: a logistic source-vs-target classifier on the union; weights are its
// probability ratio rescaled by n_P / n_Q, clipped, then normalized.
// ---------------------------------------------------------------------------

struct DluConfig {
  double l2_lambda = 1e-4;
  int max_iters = 2000;
  double clip = 100.0;
};

BaselineResult run_dlu(const TabularDataset& source, const TabularDataset& target,
                       const DluConfig& cfg = {});

}  // namespace shiftscope

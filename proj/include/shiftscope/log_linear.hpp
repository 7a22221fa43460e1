#pragma once

#include <vector>

#include <Eigen/Dense>

namespace shiftscope {

/// Concave program shared by SEES-c and KLIEP:
///
///   maximize  sum_i r_i log(max(floor, T_i . theta)) + sign * eta * sum_g |theta_g|
///   s.t.      theta >= 0,  c . theta = 1
///
/// where T has nonnegative rows and r sums to 1. sign is -1 for a penalty.
struct LogLinearProblem {
  Eigen::MatrixXd design;
  Eigen::VectorXd row_weights;
  Eigen::VectorXd constraint;
  std::vector<std::vector<int>> groups;
  double eta = 0.0;
  double penalty_sign = -1.0;
  double floor = 1e-8;

  double likelihood(const Eigen::VectorXd& theta) const;
  double value(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient) const;
  double constraint_residual(const Eigen::VectorXd& theta) const;
};

/// Merges identical design rows, summing their weights. Weights are
/// normalized to 1.
void compress_rows(const Eigen::MatrixXd& rows, const Eigen::VectorXd& weights,
                   Eigen::MatrixXd* unique_rows, Eigen::VectorXd* unique_weights);

/// Alternates hyperplane projection and clipping at zero until both
/// constraints hold within `tol`, then rescales onto the hyperplane exactly.
/// Returns false when no nonnegative point with c . theta > 0 was reached.
bool project_feasible(Eigen::VectorXd& theta, const Eigen::VectorXd& c, int max_passes = 100,
                      double tol = 1e-8);

struct AscentOptions {
  double step_size = 0.1;
  int max_iters = 5000;
  double tol = 1e-9;
  bool backtracking = true;
};

struct AscentResult {
  Eigen::VectorXd theta;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // The starting point could not be made feasible.
  bool projection_failed = false;
  int projection_failures = 0;
  std::vector<double> trace;
};

/// Projected gradient ascent with step halving on decrease and doubling after
/// an accepted step.
AscentResult maximize(const LogLinearProblem& problem, Eigen::VectorXd theta0,
                      const AscentOptions& options);

}  // namespace shiftscope

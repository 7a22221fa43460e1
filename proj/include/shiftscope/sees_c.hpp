#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "shiftscope/basis.hpp"
#include "shiftscope/data_model.hpp"
#include "shiftscope/log_linear.hpp"
#include "shiftscope/weights.hpp"

namespace shiftscope {

enum class PenaltySign {
  kSubtract,  // group penalty lowers the maximized objective (sparsity-inducing)
  kAdd,       // literal "+ eta" form, kept for comparison runs
};

struct SeesCConfig {
  double eta = 1e-3;
  double step_size = 0.1;
  int max_iters = 5000;
  double tol = 1e-9;
  double prob_floor = 1e-8;
  PenaltySign penalty_sign = PenaltySign::kSubtract;
  bool backtracking = true;

  void validate() const;
};

/// The concave program over vec(a) (index k * L + y): target design rows are
/// p(y|x) phi_k(x), the constraint is the source mean of w, and one penalty
/// group per feature.
LogLinearProblem make_sees_c_problem(const TabularDataset& source, const TabularDataset& target,
                                     const BasisSet& basis, const SeesCConfig& cfg);

struct SeesCObjective {
  double value = 0.0;
  Eigen::MatrixXd gradient;  // K x L
};

/// Objective value and analytic gradient at coefficients `a` (K x L, a >= 0).
SeesCObjective sees_c_objective(const Eigen::MatrixXd& a, const TabularDataset& source,
                                const TabularDataset& target, const BasisSet& basis,
                                const SeesCConfig& cfg);

struct SeesCResult {
  BasisWeights weights;
  Diagnostics diagnostics;
  std::vector<double> objective_trace;
  // Set when the feasibility projection failed; weights hold the best iterate.
  bool non_convergence = false;
};

SeesCResult run_sees_c(const TabularDataset& source, const TabularDataset& target,
                       std::shared_ptr<const BasisSet> basis, const SeesCConfig& cfg = {});

/// beta_i = sqrt(sum_{k in e_i} sum_y a[k, y]^2).
std::vector<double> feature_scores(const Eigen::MatrixXd& a, const BasisSet& basis);

}  // namespace shiftscope

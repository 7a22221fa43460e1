#include "shiftscope/log_linear.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace shiftscope {

double LogLinearProblem::likelihood(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd s = design * theta;
  double v = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) v += row_weights(i) * std::log(std::max(floor, s(i)));
  return v;
}

double LogLinearProblem::value(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient) const {
  const Eigen::VectorXd s = design * theta;
  double v = 0.0;
  Eigen::VectorXd coeff(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > floor) {
      v += row_weights(i) * std::log(s(i));
      coeff(i) = row_weights(i) / s(i);
    } else {
      v += row_weights(i) * std::log(floor);
      coeff(i) = 0.0;
    }
  }
  if (gradient != nullptr) *gradient = design.transpose() * coeff;
  if (eta != 0.0) {
    for (const auto& g : groups) {
      double sq = 0.0;
      for (int k : g) sq += theta(k) * theta(k);
      const double norm = std::sqrt(sq);
      v += penalty_sign * eta * norm;
      if (gradient != nullptr && norm > 0.0) {
        for (int k : g) (*gradient)(k) += penalty_sign * eta * theta(k) / norm;
      }
    }
  }
  return v;
}

double LogLinearProblem::constraint_residual(const Eigen::VectorXd& theta) const {
  return std::abs(constraint.dot(theta) - 1.0);
}

void compress_rows(const Eigen::MatrixXd& rows, const Eigen::VectorXd& weights,
                   Eigen::MatrixXd* unique_rows, Eigen::VectorXd* unique_weights) {
  std::map<std::vector<double>, double> merged;
  std::vector<double> key(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) key[static_cast<std::size_t>(j)] = rows(i, j);
    merged[key] += weights(i);
  }
  unique_rows->resize(static_cast<Eigen::Index>(merged.size()), rows.cols());
  unique_weights->resize(static_cast<Eigen::Index>(merged.size()));
  const double total = weights.sum();
  Eigen::Index k = 0;
  for (const auto& [r, w] : merged) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) (*unique_rows)(k, j) = r[static_cast<std::size_t>(j)];
    (*unique_weights)(k) = total > 0 ? w / total : 0.0;
    ++k;
  }
}

bool project_feasible(Eigen::VectorXd& theta, const Eigen::VectorXd& c, int max_passes,
                      double tol) {
  const double cc = c.squaredNorm();
  if (!(cc > 0.0)) return false;
  for (int pass = 0; pass < max_passes; ++pass) {
    theta = theta.cwiseMax(0.0);
    if (std::abs(c.dot(theta) - 1.0) <= tol) break;
    theta += (1.0 - c.dot(theta)) / cc * c;
  }
  theta = theta.cwiseMax(0.0);
  const double mass = c.dot(theta);
  if (!(mass > 0.0)) return false;
  theta /= mass;
  return true;
}

AscentResult maximize(const LogLinearProblem& problem, Eigen::VectorXd theta0,
                      const AscentOptions& options) {
  AscentResult res;
  res.projection_failed = !project_feasible(theta0, problem.constraint);
  res.theta = std::move(theta0);
  Eigen::VectorXd grad;
  res.objective = problem.value(res.theta, &grad);
  res.trace.push_back(res.objective);
  double step = options.step_size;
  const double max_step = options.step_size * 1e6;
  for (res.iterations = 0; res.iterations < options.max_iters; ++res.iterations) {
    Eigen::VectorXd cand;
    double cand_value = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      cand = res.theta + step * grad;
      if (!project_feasible(cand, problem.constraint)) {
        ++res.projection_failures;
        step *= 0.5;
        continue;
      }
      cand_value = problem.value(cand, nullptr);
      if (!options.backtracking || cand_value >= res.objective) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    const double improvement = cand_value - res.objective;
    res.theta = std::move(cand);
    res.objective = problem.value(res.theta, &grad);
    res.trace.push_back(res.objective);
    step = std::min(step * 2.0, max_step);
    if (options.backtracking && improvement < options.tol) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  res.residual = problem.constraint_residual(res.theta);
  return res;
}

}  // namespace shiftscope

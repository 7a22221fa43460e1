#include "shiftscope/sees_c.hpp"

#include <cmath>

#include "shiftscope/error.hpp"

namespace shiftscope {

void SeesCConfig::validate() const {
  if (eta < 0.0) throw Error(ErrorCode::kInvalidInput, "eta must be >= 0");
  if (!(step_size > 0.0)) throw Error(ErrorCode::kInvalidInput, "step size must be positive");
  if (max_iters < 1) throw Error(ErrorCode::kInvalidInput, "max_iters must be positive");
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidInput, "tol must be positive");
  if (!(prob_floor > 0.0 && prob_floor <= 1e-2)) {
    throw Error(ErrorCode::kInvalidInput, "prob_floor must lie in (0, 1e-2]");
  }
}

LogLinearProblem make_sees_c_problem(const TabularDataset& source, const TabularDataset& target,
                                     const BasisSet& basis, const SeesCConfig& cfg) {
  cfg.validate();
  align_schemas(source, target);
  if (!source.has_labels()) throw Error(ErrorCode::kMissingAxis, "source needs labels");
  if (!target.has_probs()) throw Error(ErrorCode::kMissingAxis, "target needs predicted probabilities");
  if (basis.feature_count() != source.width()) {
    throw Error(ErrorCode::kSchemaMismatch, "basis set was built for a different schema");
  }
  const auto K = static_cast<Eigen::Index>(basis.size());
  const auto L = static_cast<Eigen::Index>(source.schema.label_cardinality);
  std::vector<double> phi(basis.size());

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(target.size()), K * L);
  for (std::size_t r = 0; r < target.size(); ++r) {
    basis.evaluate(target.row(r), phi);
    const auto probs = target.probs(r);
    for (Eigen::Index k = 0; k < K; ++k) {
      for (Eigen::Index y = 0; y < L; ++y) {
        rows(static_cast<Eigen::Index>(r), k * L + y) = probs[static_cast<std::size_t>(y)] * phi[static_cast<std::size_t>(k)];
      }
    }
  }
  LogLinearProblem p;
  compress_rows(rows, Eigen::VectorXd::Ones(rows.rows()), &p.design, &p.row_weights);

  p.constraint = Eigen::VectorXd::Zero(K * L);
  for (std::size_t r = 0; r < source.size(); ++r) {
    basis.evaluate(source.row(r), phi);
    const Eigen::Index y = (*source.labels)[r] - 1;
    for (Eigen::Index k = 0; k < K; ++k) p.constraint(k * L + y) += phi[static_cast<std::size_t>(k)];
  }
  if (source.size() > 0) p.constraint /= static_cast<double>(source.size());

  for (std::size_t i = 0; i < basis.feature_count(); ++i) {
    std::vector<int> g;
    for (int k : basis.group(i)) {
      for (Eigen::Index y = 0; y < L; ++y) g.push_back(static_cast<int>(k * L + y));
    }
    p.groups.push_back(std::move(g));
  }
  p.eta = cfg.eta;
  p.penalty_sign = cfg.penalty_sign == PenaltySign::kSubtract ? -1.0 : 1.0;
  p.floor = cfg.prob_floor;
  return p;
}

SeesCObjective sees_c_objective(const Eigen::MatrixXd& a, const TabularDataset& source,
                                const TabularDataset& target, const BasisSet& basis,
                                const SeesCConfig& cfg) {
  const auto problem = make_sees_c_problem(source, target, basis, cfg);
  const auto K = a.rows();
  const auto L = a.cols();
  Eigen::VectorXd theta(K * L);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index y = 0; y < L; ++y) theta(k * L + y) = a(k, y);
  }
  Eigen::VectorXd grad;
  SeesCObjective out;
  out.value = problem.value(theta, &grad);
  out.gradient.resize(K, L);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index y = 0; y < L; ++y) out.gradient(k, y) = grad(k * L + y);
  }
  return out;
}

SeesCResult run_sees_c(const TabularDataset& source, const TabularDataset& target,
                       std::shared_ptr<const BasisSet> basis, const SeesCConfig& cfg) {
  const auto problem = make_sees_c_problem(source, target, *basis, cfg);
  const auto K = static_cast<Eigen::Index>(basis->size());
  const auto L = static_cast<Eigen::Index>(source.schema.label_cardinality);

  AscentOptions opts;
  opts.step_size = cfg.step_size;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.backtracking = cfg.backtracking;
  auto ascent = maximize(problem, Eigen::VectorXd::Ones(K * L), opts);

  SeesCResult out;
  out.weights.basis = std::move(basis);
  out.weights.coefficients.resize(K, L);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index y = 0; y < L; ++y) out.weights.coefficients(k, y) = ascent.theta(k * L + y);
  }
  out.non_convergence = ascent.projection_failed || ascent.residual >= 1e-6;
  out.objective_trace = std::move(ascent.trace);
  out.diagnostics["objective"] = ascent.objective;
  out.diagnostics["likelihood"] = problem.likelihood(ascent.theta);
  out.diagnostics["constraint_residual"] = ascent.residual;
  out.diagnostics["iterations"] = ascent.iterations;
  out.diagnostics["converged"] = ascent.converged ? 1.0 : 0.0;
  out.diagnostics["non_convergence"] = out.non_convergence ? 1.0 : 0.0;
  out.diagnostics["projection_failures"] = ascent.projection_failures;
  return out;
}

std::vector<double> feature_scores(const Eigen::MatrixXd& a, const BasisSet& basis) {
  std::vector<double> beta(basis.feature_count(), 0.0);
  for (std::size_t i = 0; i < basis.feature_count(); ++i) {
    double sq = 0.0;
    for (int k : basis.group(i)) sq += a.row(k).squaredNorm();
    beta[i] = std::sqrt(sq);
  }
  return beta;
}

}  // namespace shiftscope

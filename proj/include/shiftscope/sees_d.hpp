#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shiftscope/data_model.hpp"
#include "shiftscope/tabulate.hpp"
#include "shiftscope/weights.hpp"

namespace shiftscope {

struct SeesDConfig {
  int sparsity = 1;
  double weight_bound = 20.0;
  // Unknowns w(x_J, y) whose source mass p(x_J, y) does not exceed this are
  // left at 1.0 and counted as degenerate.
  double min_mass_floor = 0.0;
  bool parallel = true;
};

/// Guard on the number of candidate index sets (d choose s).
inline constexpr double kMaxSeesDCandidates = 1e5;

struct CandidateFit {
  std::vector<int> index_set;
  TableWeights weights;
  // Attained matching objective, before normalization.
  double distance = 0.0;
  int degenerate_unknowns = 0;
  int solver_iterations = 0;
};

/// All index sets of size min(2s, d) containing J, in lexicographic order.
std::vector<std::vector<int>> enumerate_kappas(std::span<const int> J, int d, int s);

/// All size-s subsets of {0..d-1} in lexicographic order.
std::vector<std::vector<int>> enumerate_subsets(int d, int s);

/// Minimizes the sum over kappa of
///   sum_{x_kappa, f} (q(x_kappa, f) - sum_y w(x_J, y) p(x_kappa, f, y))^2
/// over w in [0, M]. Returned weights are not normalized.
CandidateFit fit_candidate(const MarginalSource& source, const MarginalSource& target,
                           std::span<const int> J, const SeesDConfig& cfg);
CandidateFit fit_candidate(const TabularDataset& source, const TabularDataset& target,
                           std::span<const int> J, const SeesDConfig& cfg);

/// Evaluates the matching objective at given table weights from scratch.
double sees_d_distance(const MarginalSource& source, const MarginalSource& target,
                       const TableWeights& weights, int sparsity);

struct SeesDResult {
  TableWeights weights;  // normalized so that E_P[w] = 1
  std::vector<int> index_set;
  double distance = 0.0;
  double normalization = 1.0;
  std::vector<std::pair<std::vector<int>, double>> candidate_distances;
  Diagnostics diagnostics;
};

SeesDResult run_sees_d(const MarginalSource& source, const MarginalSource& target,
                       const SeesDConfig& cfg);
SeesDResult run_sees_d(const TabularDataset& source, const TabularDataset& target,
                       const SeesDConfig& cfg);

struct BoxLeastSquaresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes 0.5 x'Gx - h'x over lo <= x <= hi (G symmetric PSD) by projected
/// gradient with exact line search, accelerated by Newton steps on the free
/// variables.
BoxLeastSquaresResult solve_box_least_squares(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                                              double lo, double hi, double tol = 1e-10,
                                              int max_iters = 10000);

}  // namespace shiftscope

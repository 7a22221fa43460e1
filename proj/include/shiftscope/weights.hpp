#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "shiftscope/basis.hpp"
#include "shiftscope/data_model.hpp"
#include "shiftscope/predictor.hpp"

namespace shiftscope {

/// Weight 1.0 returned for (x_J, y) cells that had no source mass at fit time.
inline constexpr double kUnseenCellWeight = 1.0;

/// Lookup table over (x_J, y), dense over the product of the J cardinalities
/// and L. Cells flagged unknown fall back to kUnseenCellWeight.
struct TableWeights {
  std::vector<int> index_set;
  std::vector<int> cardinalities;
  int labels = 2;
  std::vector<double> weights;
  std::vector<std::uint8_t> known;

  static TableWeights uniform(std::vector<int> index_set, std::vector<int> cardinalities,
                              int labels, double value = 1.0);

  std::size_t cell_count() const { return weights.size(); }
  /// Flat cell for 1-based x_J levels and label y.
  std::size_t cell(std::span<const int> x_levels, int y) const;
  std::size_t cell_of_row(std::span<const double> row, int y) const;
  double lookup(std::span<const int> x_levels, int y) const;
};

/// w(x, y) = sum_k a[k, y] phi_k(x).
struct BasisWeights {
  Eigen::MatrixXd coefficients;  // K x L
  std::shared_ptr<const BasisSet> basis;
};

/// Feature-only Gaussian-kernel weights w(x) = scale * sum_b alpha_b k_b(x).
struct KernelWeights {
  Featurizer featurizer;
  Eigen::MatrixXd centers;  // B x width
  Eigen::VectorXd alpha;
  double bandwidth = 1.0;
  double scale = 1.0;
};

/// Feature-only weights from a source-vs-target classifier:
/// w(x) = scale * min(clip, ratio_scale * rho(x) / (1 - rho(x))).
struct DiscriminativeWeights {
  LogisticModel model;
  double ratio_scale = 1.0;
  double clip = 100.0;
  double scale = 1.0;
};

using WeightFunction = std::variant<TableWeights, BasisWeights, KernelWeights, DiscriminativeWeights>;

struct WeightEvaluation {
  std::vector<double> values;
  // Rows that hit an unseen Table cell.
  std::size_t fallback_count = 0;
};

/// Evaluates w at every row of `ds`, reading y from its labels (label-free
/// weight kinds do not need them).
WeightEvaluation evaluate_weights(const WeightFunction& w, const TabularDataset& ds);

bool depends_on_label(const WeightFunction& w);

/// Multiplies every stored weight/coefficient by `factor`.
void scale_weights(WeightFunction& w, double factor);

/// Rescales so the mean over `source` rows equals 1; returns the factor used.
double normalize_weights(WeightFunction& w, const TabularDataset& source);

}  // namespace shiftscope

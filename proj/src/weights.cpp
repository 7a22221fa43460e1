#include "shiftscope/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shiftscope/error.hpp"

namespace shiftscope {

TableWeights TableWeights::uniform(std::vector<int> index_set, std::vector<int> cardinalities,
                                   int labels, double value) {
  TableWeights t;
  t.index_set = std::move(index_set);
  t.cardinalities = std::move(cardinalities);
  t.labels = labels;
  std::size_t cells = static_cast<std::size_t>(labels);
  for (int c : t.cardinalities) cells *= static_cast<std::size_t>(c);
  t.weights.assign(cells, value);
  t.known.assign(cells, 1);
  return t;
}

std::size_t TableWeights::cell(std::span<const int> x_levels, int y) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    flat = flat * static_cast<std::size_t>(cardinalities[i]) + static_cast<std::size_t>(x_levels[i] - 1);
  }
  return flat * static_cast<std::size_t>(labels) + static_cast<std::size_t>(y - 1);
}

std::size_t TableWeights::cell_of_row(std::span<const double> row, int y) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    const int level = static_cast<int>(row[static_cast<std::size_t>(index_set[i])]);
    flat = flat * static_cast<std::size_t>(cardinalities[i]) + static_cast<std::size_t>(level - 1);
  }
  return flat * static_cast<std::size_t>(labels) + static_cast<std::size_t>(y - 1);
}

double TableWeights::lookup(std::span<const int> x_levels, int y) const {
  const auto c = cell(x_levels, y);
  return known[c] ? weights[c] : kUnseenCellWeight;
}

bool depends_on_label(const WeightFunction& w) {
  return std::holds_alternative<TableWeights>(w) || std::holds_alternative<BasisWeights>(w);
}

namespace {

double discriminative_weight(const DiscriminativeWeights& w, double rho) {
  rho = std::clamp(rho, 0.0, 1.0);
  const double ratio = rho >= 1.0 ? w.clip : w.ratio_scale * rho / (1.0 - rho);
  return w.scale * std::clamp(ratio, 0.0, w.clip);
}

}  // namespace

WeightEvaluation evaluate_weights(const WeightFunction& w, const TabularDataset& ds) {
  WeightEvaluation out;
  out.values.resize(ds.size());
  if (depends_on_label(w) && !ds.has_labels()) {
    throw Error(ErrorCode::kMissingAxis, "label-dependent weights need labeled rows");
  }
  if (const auto* t = std::get_if<TableWeights>(&w)) {
    for (std::size_t r = 0; r < ds.size(); ++r) {
      const auto c = t->cell_of_row(ds.row(r), (*ds.labels)[r]);
      if (t->known[c]) {
        out.values[r] = t->weights[c];
      } else {
        out.values[r] = kUnseenCellWeight;
        ++out.fallback_count;
      }
    }
  } else if (const auto* b = std::get_if<BasisWeights>(&w)) {
    std::vector<double> phi(b->basis->size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
      b->basis->evaluate(ds.row(r), phi);
      const auto y = static_cast<Eigen::Index>((*ds.labels)[r] - 1);
      double v = 0.0;
      for (std::size_t k = 0; k < phi.size(); ++k) {
        v += b->coefficients(static_cast<Eigen::Index>(k), y) * phi[k];
      }
      out.values[r] = v;
    }
  } else if (const auto* k = std::get_if<KernelWeights>(&w)) {
    const Eigen::MatrixXd X = k->featurizer.transform(ds);
    const double inv = 1.0 / (2.0 * k->bandwidth * k->bandwidth);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const Eigen::VectorXd d2 = (k->centers.rowwise() - X.row(r)).rowwise().squaredNorm();
      out.values[static_cast<std::size_t>(r)] = k->scale * (-inv * d2.array()).exp().matrix().dot(k->alpha);
    }
  } else if (const auto* dw = std::get_if<DiscriminativeWeights>(&w)) {
    const Eigen::MatrixXd probs = dw->model.probabilities(dw->model.featurizer.transform(ds));
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      out.values[static_cast<std::size_t>(r)] = discriminative_weight(*dw, probs(r, 1));
    }
  }
  return out;
}

void scale_weights(WeightFunction& w, double factor) {
  std::visit(
      [factor](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TableWeights>) {
          for (auto& x : v.weights) x *= factor;
        } else if constexpr (std::is_same_v<T, BasisWeights>) {
          v.coefficients *= factor;
        } else {
          v.scale *= factor;
        }
      },
      w);
}

double normalize_weights(WeightFunction& w, const TabularDataset& source) {
  if (source.size() == 0) return 1.0;
  const auto eval = evaluate_weights(w, source);
  const double mean = std::accumulate(eval.values.begin(), eval.values.end(), 0.0) /
                      static_cast<double>(source.size());
  if (!(mean > 0.0)) return 1.0;
  scale_weights(w, 1.0 / mean);
  return 1.0 / mean;
}

}  // namespace shiftscope

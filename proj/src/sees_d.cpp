#include "shiftscope/sees_d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "shiftscope/error.hpp"
#include "shiftscope/parallel.hpp"

namespace shiftscope {

namespace {

void combinations(int n, int k, int start, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out, std::span<const int> pool) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    if (n - i < k - static_cast<int>(cur.size())) break;
    cur.push_back(pool[static_cast<std::size_t>(i)]);
    combinations(n, k, i + 1, cur, out, pool);
    cur.pop_back();
  }
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::string format_set(std::span<const int> s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << '}';
  return os.str();
}

struct KappaTables {
  std::vector<int> kappa;
  EmpiricalPmf source;  // kappa..., PREDICTION, LABEL
  EmpiricalPmf target;  // kappa..., PREDICTION
};

KappaTables make_tables(const MarginalSource& source, const MarginalSource& target,
                        const std::vector<int>& kappa) {
  std::vector<Axis> axes;
  for (int f : kappa) axes.push_back(Axis::of_feature(f));
  axes.push_back(Axis::prediction());
  KappaTables t{kappa, {}, target.marginal(axes)};
  axes.push_back(Axis::label());
  t.source = source.marginal(axes);
  return t;
}

void check_inputs(const MarginalSource& source, const MarginalSource& target,
                  const SeesDConfig& cfg) {
  align_schemas(source.schema(), target.schema());
  if (!source.schema().all_discrete()) {
    throw Error(ErrorCode::kInvalidInput, "SEES-d needs all-discrete features; discretize first");
  }
  const int d = static_cast<int>(source.feature_count());
  if (cfg.sparsity < 0 || cfg.sparsity > d) {
    throw Error(ErrorCode::kInvalidInput, "sparsity must lie in [0, d]");
  }
  if (!(cfg.weight_bound >= 1.0)) throw Error(ErrorCode::kInvalidInput, "weight bound must be >= 1");
  if (cfg.min_mass_floor < 0.0) throw Error(ErrorCode::kInvalidInput, "mass floor must be >= 0");
}

double objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(G * x) - h.dot(x);
}

// Sum over rows of (q - sum_y w(x_J, y) p)^2 for one kappa table pair.
double residual_sum(const KappaTables& t, std::span<const int> j_pos, const TableWeights& w) {
  const int L = w.labels;
  const std::size_t axes = t.target.axes().size();
  std::vector<int> levels(axes);
  std::vector<int> xj(j_pos.size());
  double sum = 0.0;
  for (std::size_t cell = 0; cell < t.target.cell_count(); ++cell) {
    t.target.unflatten(cell, levels);
    for (std::size_t i = 0; i < j_pos.size(); ++i) xj[i] = levels[static_cast<std::size_t>(j_pos[i])];
    double r = t.target.mass(cell);
    for (int y = 1; y <= L; ++y) {
      const double p = t.source.mass(cell * static_cast<std::size_t>(L) + static_cast<std::size_t>(y - 1));
      if (p != 0.0) r -= w.lookup(xj, y) * p;
    }
    sum += r * r;
  }
  return sum;
}

std::vector<int> positions_in(std::span<const int> J, const std::vector<int>& kappa) {
  std::vector<int> pos;
  for (int f : J) {
    auto it = std::find(kappa.begin(), kappa.end(), f);
    pos.push_back(static_cast<int>(it - kappa.begin()));
  }
  return pos;
}

CandidateFit fit_with_tables(std::span<const int> J, const std::vector<const KappaTables*>& tables,
                             const FeatureSchema& schema, const SeesDConfig& cfg) {
  const int L = schema.label_cardinality;
  std::vector<int> cards;
  for (int f : J) cards.push_back(schema[static_cast<std::size_t>(f)].cardinality);
  CandidateFit fit;
  fit.index_set.assign(J.begin(), J.end());
  fit.weights = TableWeights::uniform(fit.index_set, cards, L, 1.0);
  const std::size_t blocks = fit.weights.cell_count() / static_cast<std::size_t>(L);

  std::vector<Eigen::MatrixXd> G(blocks, Eigen::MatrixXd::Zero(L, L));
  std::vector<Eigen::VectorXd> h(blocks, Eigen::VectorXd::Zero(L));
  std::vector<Eigen::VectorXd> column_mass(blocks, Eigen::VectorXd::Zero(L));

  Eigen::VectorXd a(L);
  for (const auto* t : tables) {
    const auto j_pos = positions_in(J, t->kappa);
    std::vector<int> levels(t->target.axes().size());
    for (std::size_t cell = 0; cell < t->target.cell_count(); ++cell) {
      const double q = t->target.mass(cell);
      bool any = q != 0.0;
      for (int y = 0; y < L; ++y) {
        a(y) = t->source.mass(cell * static_cast<std::size_t>(L) + static_cast<std::size_t>(y));
        any = any || a(y) != 0.0;
      }
      if (!any) continue;
      t->target.unflatten(cell, levels);
      std::size_t block = 0;
      for (std::size_t i = 0; i < j_pos.size(); ++i) {
        block = block * static_cast<std::size_t>(cards[i]) +
                static_cast<std::size_t>(levels[static_cast<std::size_t>(j_pos[i])] - 1);
      }
      G[block].noalias() += a * a.transpose();
      h[block].noalias() += q * a;
      column_mass[block] += a;
    }
  }

  // Each kappa table carries the full p(x_J, y) mass once.
  const double kappa_count = static_cast<double>(std::max<std::size_t>(1, tables.size()));
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<int> free;
    for (int y = 0; y < L; ++y) {
      const double mass = column_mass[b](y) / kappa_count;
      const auto c = b * static_cast<std::size_t>(L) + static_cast<std::size_t>(y);
      if (mass > cfg.min_mass_floor) {
        free.push_back(y);
      } else {
        fit.weights.known[c] = 0;
        fit.weights.weights[c] = kUnseenCellWeight;
        ++fit.degenerate_unknowns;
      }
    }
    if (free.empty()) continue;
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd Gf(nf, nf);
    Eigen::VectorXd hf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      hf(i) = h[b](free[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < nf; ++j) Gf(i, j) = G[b](free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
      // Fixed unknowns sit at 1.0 and still couple through G.
      for (int y = 0; y < L; ++y) {
        if (std::find(free.begin(), free.end(), y) == free.end()) {
          hf(i) -= G[b](free[static_cast<std::size_t>(i)], y) * kUnseenCellWeight;
        }
      }
    }
    const auto sol = solve_box_least_squares(Gf, hf, 0.0, cfg.weight_bound);
    fit.solver_iterations += sol.iterations;
    for (Eigen::Index i = 0; i < nf; ++i) {
      fit.weights.weights[b * static_cast<std::size_t>(L) + static_cast<std::size_t>(free[static_cast<std::size_t>(i)])] = sol.x(i);
    }
  }

  double distance = 0.0;
  for (const auto* t : tables) distance += residual_sum(*t, positions_in(J, t->kappa), fit.weights);
  fit.distance = distance;
  return fit;
}

}  // namespace

std::vector<std::vector<int>> enumerate_subsets(int d, int s) {
  std::vector<int> pool(static_cast<std::size_t>(std::max(d, 0)));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  if (s < 0 || s > d) return out;
  combinations(d, s, 0, cur, out, pool);
  return out;
}

std::vector<std::vector<int>> enumerate_kappas(std::span<const int> J, int d, int s) {
  const int k = std::min(2 * s, d);
  std::vector<int> rest;
  for (int i = 0; i < d; ++i) {
    if (std::find(J.begin(), J.end(), i) == J.end()) rest.push_back(i);
  }
  std::vector<std::vector<int>> extra;
  std::vector<int> cur;
  const int need = k - static_cast<int>(J.size());
  if (need < 0) return {};
  combinations(static_cast<int>(rest.size()), need, 0, cur, extra, rest);
  std::vector<std::vector<int>> out;
  for (auto& e : extra) {
    e.insert(e.end(), J.begin(), J.end());
    std::sort(e.begin(), e.end());
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end());
  return out;
}

BoxLeastSquaresResult solve_box_least_squares(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                                              double lo, double hi, double tol, int max_iters) {
  const Eigen::Index n = h.size();
  BoxLeastSquaresResult res;
  res.x = Eigen::VectorXd::Constant(n, std::clamp(1.0, lo, hi));
  const double scale = std::max(G.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(lo).cwiseMin(hi).eval(); };
  double f = objective(G, h, res.x);
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    const Eigen::VectorXd g = G * res.x - h;
    Eigen::VectorXd pg = g;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = res.x(i) <= lo && g(i) > 0.0;
      const bool at_hi = res.x(i) >= hi && g(i) < 0.0;
      if (at_lo || at_hi) {
        pg(i) = 0.0;
      } else {
        free.push_back(i);
      }
    }
    if (pg.cwiseAbs().maxCoeff() <= tol * scale * std::max(1.0, res.x.cwiseAbs().maxCoeff())) {
      res.converged = true;
      break;
    }
    // Newton step on the free variables.
    bool moved = false;
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Gf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index i = 0; i < nf; ++i) {
        gf(i) = g(free[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < nf; ++j) Gf(i, j) = G(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
      }
      const Eigen::VectorXd step = Gf.completeOrthogonalDecomposition().solve(-gf);
      if (step.allFinite()) {
        Eigen::VectorXd cand = res.x;
        for (Eigen::Index i = 0; i < nf; ++i) cand(free[static_cast<std::size_t>(i)]) += step(i);
        cand = clamp(cand);
        const double fc = objective(G, h, cand);
        if (fc < f) {
          const bool stalled = (cand - res.x).cwiseAbs().maxCoeff() == 0.0;
          res.x = cand;
          f = fc;
          moved = !stalled;
        }
      }
    }
    if (moved) continue;
    // Projected gradient with exact line search along -pg.
    const double curvature = pg.dot(G * pg);
    double t = curvature > 0.0 ? pg.squaredNorm() / curvature : 1.0 / scale;
    bool decreased = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::VectorXd cand = clamp(res.x - t * pg);
      const double fc = objective(G, h, cand);
      if (fc < f) {
        res.x = cand;
        f = fc;
        decreased = true;
        break;
      }
      t *= 0.5;
    }
    if (!decreased) {
      res.converged = true;
      break;
    }
  }
  return res;
}

CandidateFit fit_candidate(const MarginalSource& source, const MarginalSource& target,
                           std::span<const int> J, const SeesDConfig& cfg) {
  check_inputs(source, target, cfg);
  const int d = static_cast<int>(source.feature_count());
  const auto kappas = enumerate_kappas(J, d, static_cast<int>(J.size()));
  std::vector<KappaTables> tables;
  for (const auto& k : kappas) tables.push_back(make_tables(source, target, k));
  std::vector<const KappaTables*> refs;
  for (const auto& t : tables) refs.push_back(&t);
  return fit_with_tables(J, refs, source.schema(), cfg);
}

CandidateFit fit_candidate(const TabularDataset& source, const TabularDataset& target,
                           std::span<const int> J, const SeesDConfig& cfg) {
  return fit_candidate(MarginalSource::from_dataset(source), MarginalSource::from_dataset(target),
                       J, cfg);
}

double sees_d_distance(const MarginalSource& source, const MarginalSource& target,
                       const TableWeights& weights, int sparsity) {
  const int d = static_cast<int>(source.feature_count());
  double total = 0.0;
  for (const auto& k : enumerate_kappas(weights.index_set, d, sparsity)) {
    const auto t = make_tables(source, target, k);
    total += residual_sum(t, positions_in(weights.index_set, k), weights);
  }
  return total;
}

SeesDResult run_sees_d(const MarginalSource& source, const MarginalSource& target,
                       const SeesDConfig& cfg) {
  check_inputs(source, target, cfg);
  const int d = static_cast<int>(source.feature_count());
  const int s = cfg.sparsity;
  if (binomial(d, s) > kMaxSeesDCandidates) {
    throw Error(ErrorCode::kTooManyCandidates,
                "d choose s = " + std::to_string(binomial(d, s)) + " exceeds the 10^5 guard");
  }
  const auto candidates = enumerate_subsets(d, s);
  const int k = std::min(2 * s, d);

  // Every kappa of size k contains some J of size s, so all of them are needed.
  const auto kappas = enumerate_subsets(d, k);
  std::vector<std::unique_ptr<KappaTables>> tables(kappas.size());
  parallel_for(
      kappas.size(),
      [&](std::size_t i) { tables[i] = std::make_unique<KappaTables>(make_tables(source, target, kappas[i])); },
      cfg.parallel);

  std::vector<CandidateFit> fits(candidates.size());
  parallel_for(
      candidates.size(),
      [&](std::size_t c) {
        const auto& J = candidates[c];
        std::vector<const KappaTables*> refs;
        for (const auto& t : tables) {
          if (std::includes(t->kappa.begin(), t->kappa.end(), J.begin(), J.end())) refs.push_back(t.get());
        }
        fits[c] = fit_with_tables(J, refs, source.schema(), cfg);
      },
      cfg.parallel);

  SeesDResult result;
  std::size_t best = 0;
  for (std::size_t c = 0; c < fits.size(); ++c) {
    result.candidate_distances.emplace_back(fits[c].index_set, fits[c].distance);
    result.diagnostics["distance" + format_set(fits[c].index_set)] = fits[c].distance;
    if (fits[c].distance < fits[best].distance - 1e-12) best = c;
  }
  auto& chosen = fits[best];
  result.index_set = chosen.index_set;
  result.distance = chosen.distance;

  std::vector<Axis> axes;
  for (int f : chosen.index_set) axes.push_back(Axis::of_feature(f));
  axes.push_back(Axis::label());
  const auto p = source.marginal(axes);
  double expectation = 0.0;
  for (std::size_t cell = 0; cell < p.cell_count(); ++cell) {
    const double w = chosen.weights.known[cell] ? chosen.weights.weights[cell] : kUnseenCellWeight;
    expectation += w * p.mass(cell);
  }
  result.weights = std::move(chosen.weights);
  if (expectation > 0.0) {
    result.normalization = 1.0 / expectation;
    for (std::size_t cell = 0; cell < result.weights.cell_count(); ++cell) {
      if (result.weights.known[cell]) result.weights.weights[cell] /= expectation;
    }
  }
  result.diagnostics["objective"] = result.distance;
  result.diagnostics["candidates"] = static_cast<double>(fits.size());
  result.diagnostics["degenerate_unknowns"] = chosen.degenerate_unknowns;
  result.diagnostics["solver_iterations"] = chosen.solver_iterations;
  result.diagnostics["normalization"] = result.normalization;
  double normalized = 0.0;
  for (std::size_t cell = 0; cell < p.cell_count(); ++cell) {
    const double w = result.weights.known[cell] ? result.weights.weights[cell] : kUnseenCellWeight;
    normalized += w * p.mass(cell);
  }
  result.diagnostics["constraint_residual"] = std::abs(normalized - 1.0);
  return result;
}

SeesDResult run_sees_d(const TabularDataset& source, const TabularDataset& target,
                       const SeesDConfig& cfg) {
  return run_sees_d(MarginalSource::from_dataset(source), MarginalSource::from_dataset(target), cfg);
}

}  // namespace shiftscope

#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/estimator.hpp"
#include "shiftscope/experiments.hpp"
#include "shiftscope/sees_c.hpp"
#include "shiftscope/synth.hpp"

using namespace shiftscope;

namespace {

struct Pair {
  TabularDataset source, target;
};

Pair small_pair(std::uint64_t seed) {
  SimulationSizes sizes{1500, 1500, 6000};
  auto sc = sjs_scenario(4, {1}, sizes, seed);
  return {sc.source, sc.target};
}

Eigen::MatrixXd random_coefficients(std::mt19937& gen, Eigen::Index K, Eigen::Index L) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd a(K, L);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = u(gen);
  return a;
}

double mean_weight(const BasisWeights& w, const TabularDataset& ds) {
  const auto eval = evaluate_weights(WeightFunction{w}, ds);
  double m = 0.0;
  for (double v : eval.values) m += v;
  return m / static_cast<double>(eval.values.size());
}

}  // namespace

TEST_SUITE("sees-c") {

TEST_CASE("basis sizes") {
  FeatureSchema mixed;
  mixed.columns = {Column::continuous("x1"), Column::discrete("x2", 2)};
  CHECK(default_basis(mixed).size() == 3);
  CHECK(default_basis(FeatureSchema::uniform_discrete(2, 3, 2)).size() == 6);
  FeatureSchema empty;
  CHECK_THROWS_AS(default_basis(empty), Error);
}

TEST_CASE("uniform indicator coefficients give objective 0") {
  const auto pair = small_pair(1);
  const BasisSet basis = default_basis(pair.source.schema);
  const double d = static_cast<double>(pair.source.width());
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(basis.size()), 2, 1.0 / d);
  SeesCConfig cfg;
  cfg.eta = 0.0;
  CHECK(std::abs(sees_c_objective(a, pair.source, pair.target, basis, cfg).value) < 1e-12);
}

TEST_CASE("penalty is subtracted per feature group") {
  const auto pair = small_pair(2);
  const BasisSet basis = default_basis(pair.source.schema);
  std::mt19937 gen(3);
  const auto a = random_coefficients(gen, static_cast<Eigen::Index>(basis.size()), 2);
  SeesCConfig off;
  off.eta = 0.0;
  SeesCConfig on;
  on.eta = 0.5;
  double penalty = 0.0;
  for (double b : feature_scores(a, basis)) penalty += b;
  const double v0 = sees_c_objective(a, pair.source, pair.target, basis, off).value;
  const double v1 = sees_c_objective(a, pair.source, pair.target, basis, on).value;
  CHECK(v1 == doctest::Approx(v0 - 0.5 * penalty).epsilon(1e-12));

  // Plain likelihood term computed directly.
  double ll = 0.0;
  std::vector<double> phi(basis.size());
  for (std::size_t r = 0; r < pair.target.size(); ++r) {
    basis.evaluate(pair.target.row(r), phi);
    double s = 0.0;
    for (int y = 0; y < 2; ++y) {
      double wy = 0.0;
      for (std::size_t k = 0; k < phi.size(); ++k) wy += a(static_cast<Eigen::Index>(k), y) * phi[k];
      s += pair.target.probs(r)[static_cast<std::size_t>(y)] * wy;
    }
    ll += std::log(std::max(1e-8, s));
  }
  CHECK(v0 == doctest::Approx(ll / static_cast<double>(pair.target.size())).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  const auto pair = small_pair(4);
  const BasisSet basis = default_basis(pair.source.schema);
  std::mt19937 gen(5);
  SeesCConfig cfg;
  cfg.eta = 0.01;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_coefficients(gen, static_cast<Eigen::Index>(basis.size()), 2);
    const auto obj = sees_c_objective(a, pair.source, pair.target, basis, cfg);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      Eigen::MatrixXd up = a, dn = a;
      up(i) += h;
      dn(i) -= h;
      const double fd = (sees_c_objective(up, pair.source, pair.target, basis, cfg).value -
                         sees_c_objective(dn, pair.source, pair.target, basis, cfg).value) / (2 * h);
      worst = std::max(worst, std::abs(fd - obj.gradient(i)) / std::max(1e-6, std::abs(obj.gradient(i))));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("likelihood term is concave along segments") {
  const auto pair = small_pair(6);
  const BasisSet basis = default_basis(pair.source.schema);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeesCConfig cfg;
  cfg.eta = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_coefficients(gen, static_cast<Eigen::Index>(basis.size()), 2);
    const auto b = random_coefficients(gen, static_cast<Eigen::Index>(basis.size()), 2);
    const double t = u(gen);
    const double mid = sees_c_objective(t * a + (1 - t) * b, pair.source, pair.target, basis, cfg).value;
    const double fa = sees_c_objective(a, pair.source, pair.target, basis, cfg).value;
    const double fb = sees_c_objective(b, pair.source, pair.target, basis, cfg).value;
    CHECK(mid >= t * fa + (1 - t) * fb - 1e-10);
  }
}

TEST_CASE("identical source and target give weights near 1") {
  const auto pair = small_pair(8);
  auto basis = std::make_shared<const BasisSet>(default_basis(pair.source.schema));
  SeesCConfig cfg;
  cfg.eta = 0.0;
  const auto r = run_sees_c(pair.source, pair.source.without_labels(), basis, cfg);
  const auto eval = evaluate_weights(WeightFunction{r.weights}, pair.source);
  double sq = 0.0;
  for (double v : eval.values) sq += (v - 1.0) * (v - 1.0);
  CHECK(std::sqrt(sq / static_cast<double>(eval.values.size())) < 0.05);
}

TEST_CASE("returned weights are feasible and the ascent is monotone") {
  const auto pair = small_pair(9);
  auto basis = std::make_shared<const BasisSet>(default_basis(pair.source.schema));
  const auto r = run_sees_c(pair.source, pair.target, basis);
  CHECK_FALSE(r.non_convergence);
  CHECK((r.weights.coefficients.array() >= 0.0).all());
  CHECK(std::abs(mean_weight(r.weights, pair.source) - 1.0) < 1e-6);
  CHECK(r.diagnostics.at("constraint_residual") < 1e-6);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12);
  }
}

TEST_CASE("feature scores") {
  const BasisSet basis = default_basis(FeatureSchema::uniform_discrete(3, 2, 2));
  CHECK(feature_scores(Eigen::MatrixXd::Zero(6, 2), basis) == std::vector<double>{0, 0, 0});
  const BasisSet single({{BasisFunction::Kind::kIndicator, 1, 1, 0.0}}, 3);
  Eigen::MatrixXd a(1, 2);
  a << 3, 4;
  CHECK(feature_scores(a, single) == std::vector<double>{0, 5, 0});
}

TEST_CASE("invalid configurations are rejected") {
  SeesCConfig cfg;
  cfg.eta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.prob_floor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("the largest score points at the shifted feature") {
  int hits = 0;
  const int trials = 10;
  for (int seed = 1; seed <= trials; ++seed) {
    const int shifted = seed % 6;
    auto sc = sjs_scenario(6, {shifted}, SimulationSizes{}, static_cast<std::uint64_t>(seed));
    auto basis = std::make_shared<const BasisSet>(default_basis(sc.source.schema));
    const auto r = run_sees_c(sc.source, sc.target, basis);
    const auto beta = feature_scores(r.weights.coefficients, *basis);
    hits += top_features(beta, 1) == std::vector<int>{shifted};
  }
  CHECK(hits >= 8);
}

}

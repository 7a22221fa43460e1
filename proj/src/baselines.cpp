#include "shiftscope/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shiftscope/error.hpp"
#include "shiftscope/log_linear.hpp"
#include "shiftscope/predictor.hpp"
#include "shiftscope/random.hpp"

namespace shiftscope {

BbseFit fit_bbse(const MarginalSource& source, const MarginalSource& target) {
  align_schemas(source.schema(), target.schema());
  const int L = source.label_cardinality();
  const std::vector<Axis> joint_axes{Axis::prediction(), Axis::label()};
  const std::vector<Axis> pred_axes{Axis::prediction()};
  const auto joint = source.marginal(joint_axes);
  const auto pred = target.marginal(pred_axes);

  BbseFit fit;
  fit.confusion.resize(L, L);
  fit.target_pred_marginal.resize(L);
  for (int f = 0; f < L; ++f) {
    fit.target_pred_marginal(f) = pred.mass(static_cast<std::size_t>(f));
    for (int y = 0; y < L; ++y) {
      fit.confusion(f, y) = joint.mass(static_cast<std::size_t>(f * L + y));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fit.confusion);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  fit.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(fit.condition_number <= kMaxConfusionCondition)) {
    throw Error(ErrorCode::kSingularConfusion,
                "confusion matrix is numerically singular (condition number " +
                    std::to_string(fit.condition_number) + ")");
  }
  fit.class_weights = fit.confusion.fullPivLu().solve(fit.target_pred_marginal);
  for (int y = 0; y < L; ++y) {
    if (fit.class_weights(y) < 0.0) {
      fit.class_weights(y) = 0.0;
      ++fit.clipped_classes;
    }
  }
  const Eigen::VectorXd prior = fit.confusion.colwise().sum().transpose();
  const double expectation = prior.dot(fit.class_weights);
  if (expectation > 0.0) fit.class_weights /= expectation;
  return fit;
}

BaselineResult run_bbse(const MarginalSource& source, const MarginalSource& target) {
  const auto fit = fit_bbse(source, target);
  const int L = source.label_cardinality();
  auto table = TableWeights::uniform({}, {}, L);
  for (int y = 0; y < L; ++y) table.weights[static_cast<std::size_t>(y)] = fit.class_weights(y);
  BaselineResult out{std::move(table), {}};
  out.diagnostics["condition_number"] = fit.condition_number;
  out.diagnostics["clipped_classes"] = fit.clipped_classes;
  for (int y = 0; y < L; ++y) {
    out.diagnostics["class_weight[" + std::to_string(y + 1) + "]"] = fit.class_weights(y);
  }
  return out;
}

BaselineResult run_bbse(const TabularDataset& source, const TabularDataset& target) {
  return run_bbse(MarginalSource::from_dataset(source), MarginalSource::from_dataset(target));
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centers,
                              double bandwidth) {
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  Eigen::MatrixXd K(X.rows(), centers.rows());
  const Eigen::VectorXd xn = X.rowwise().squaredNorm();
  const Eigen::VectorXd cn = centers.rowwise().squaredNorm();
  K.noalias() = X * centers.transpose();
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      const double d2 = std::max(0.0, xn(i) + cn(j) - 2.0 * K(i, j));
      K(i, j) = std::exp(-inv * d2);
    }
  }
  return K;
}

}  // namespace

BaselineResult run_kliep(const TabularDataset& source, const TabularDataset& target,
                         const KliepConfig& cfg) {
  align_schemas(source, target);
  if (source.size() == 0 || target.size() == 0) {
    throw Error(ErrorCode::kInvalidInput, "KLIEP needs nonempty source and target");
  }
  Rng rng(cfg.seed);
  auto featurizer = Featurizer::fit(source, false);
  const Eigen::MatrixXd Xs = featurizer.transform(source);
  const Eigen::MatrixXd Xt = featurizer.transform(target);

  const auto picks = rng.sample_without_replacement(
      target.size(), std::min<std::size_t>(target.size(), static_cast<std::size_t>(cfg.centers)));
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(picks.size()), Xt.cols());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    centers.row(static_cast<Eigen::Index>(i)) = Xt.row(static_cast<Eigen::Index>(picks[i]));
  }

  // Median pairwise distance over a subsample of the pooled rows.
  const std::size_t pooled = source.size() + target.size();
  const auto sub = rng.sample_without_replacement(
      pooled, std::min<std::size_t>(pooled, static_cast<std::size_t>(cfg.bandwidth_sample)));
  auto pooled_row = [&](std::size_t i) {
    return i < source.size() ? Xs.row(static_cast<Eigen::Index>(i))
                             : Xt.row(static_cast<Eigen::Index>(i - source.size()));
  };
  std::vector<double> dists;
  dists.reserve(sub.size() * (sub.size() - 1) / 2);
  for (std::size_t i = 0; i < sub.size(); ++i) {
    for (std::size_t j = i + 1; j < sub.size(); ++j) {
      dists.push_back((pooled_row(sub[i]) - pooled_row(sub[j])).norm());
    }
  }
  if (dists.empty()) throw Error(ErrorCode::kDegenerateKernel, "too few rows for a bandwidth");
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  const double bandwidth = *mid;
  if (!(bandwidth > 0.0)) {
    throw Error(ErrorCode::kDegenerateKernel, "median pairwise distance is zero");
  }

  LogLinearProblem problem;
  const Eigen::MatrixXd Kt = kernel_matrix(Xt, centers, bandwidth);
  compress_rows(Kt, Eigen::VectorXd::Ones(Kt.rows()), &problem.design, &problem.row_weights);
  problem.constraint = kernel_matrix(Xs, centers, bandwidth).colwise().mean().transpose();
  problem.eta = 0.0;

  AscentOptions opts;
  opts.step_size = cfg.step_size;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  const auto ascent = maximize(problem, Eigen::VectorXd::Ones(centers.rows()), opts);

  KernelWeights kw{std::move(featurizer), std::move(centers), ascent.theta, bandwidth, 1.0};
  BaselineResult out{std::move(kw), {}};
  const double factor = normalize_weights(out.weights, source);
  out.diagnostics["objective"] = ascent.objective;
  out.diagnostics["iterations"] = ascent.iterations;
  out.diagnostics["bandwidth"] = bandwidth;
  out.diagnostics["constraint_residual"] = ascent.residual;
  out.diagnostics["normalization"] = factor;
  return out;
}

BaselineResult run_dlu(const TabularDataset& source, const TabularDataset& target,
                       const DluConfig& cfg) {
  align_schemas(source, target);
  if (source.size() == 0 || target.size() == 0) {
    throw Error(ErrorCode::kInvalidInput, "DLU needs nonempty source and target");
  }
  TabularDataset uni;
  uni.schema = source.schema;
  uni.schema.label_cardinality = 2;
  uni.schema.label_categories.clear();
  uni.rows = source.size() + target.size();
  uni.values = source.values;
  uni.values.insert(uni.values.end(), target.values.begin(), target.values.end());
  std::vector<int> domain(source.size(), 1);
  domain.resize(uni.rows, 2);
  uni.labels = std::move(domain);

  auto model = train_logistic(uni, cfg.l2_lambda, cfg.max_iters);
  DiscriminativeWeights dw;
  dw.ratio_scale = static_cast<double>(source.size()) / static_cast<double>(target.size());
  dw.clip = cfg.clip;
  const bool converged = model.converged;
  const int iterations = model.iterations;
  dw.model = std::move(model);
  BaselineResult out{std::move(dw), {}};
  const double factor = normalize_weights(out.weights, source);
  out.diagnostics["probability_ratio_form"] = 1.0;
  out.diagnostics["classifier_converged"] = converged ? 1.0 : 0.0;
  out.diagnostics["classifier_iterations"] = iterations;
  out.diagnostics["normalization"] = factor;
  return out;
}

}  // namespace shiftscope

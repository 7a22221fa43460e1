#include "shiftscope/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "shiftscope/error.hpp"
#include "shiftscope/io.hpp"

namespace shiftscope {

Featurizer Featurizer::fit(const TabularDataset& sample, bool drop_first) {
  Featurizer f;
  f.schema_ = sample.schema;
  f.drop_first_ = drop_first;
  const std::size_t d = sample.width();
  f.offsets_.resize(d);
  f.mean_.assign(d, 0.0);
  f.scale_.assign(d, 1.0);
  std::size_t w = 0;
  for (std::size_t c = 0; c < d; ++c) {
    f.offsets_[c] = w;
    const auto& col = sample.schema[c];
    if (col.is_discrete()) {
      w += static_cast<std::size_t>(col.cardinality - (drop_first ? 1 : 0));
      continue;
    }
    w += 1;
    const double n = static_cast<double>(sample.size());
    if (sample.size() == 0) continue;
    double mean = 0.0;
    for (std::size_t r = 0; r < sample.size(); ++r) mean += sample.at(r, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < sample.size(); ++r) var += std::pow(sample.at(r, c) - mean, 2);
    var /= n;
    f.mean_[c] = mean;
    f.scale_[c] = var > 0 ? std::sqrt(var) : 1.0;
  }
  f.width_ = w;
  return f;
}

void Featurizer::transform_row(std::span<const double> row, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    const auto& col = schema_[c];
    if (col.is_discrete()) {
      const int level = static_cast<int>(row[c]);
      const int slot = level - (drop_first_ ? 2 : 1);
      if (slot >= 0) out[offsets_[c] + static_cast<std::size_t>(slot)] = 1.0;
    } else {
      out[offsets_[c]] = (row[c] - mean_[c]) / scale_[c];
    }
  }
}

Eigen::MatrixXd Featurizer::transform(const TabularDataset& ds) const {
  align_schemas(schema_, ds.schema);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(width_));
  std::vector<double> buf(width_);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    transform_row(ds.row(r), buf);
    for (std::size_t j = 0; j < width_; ++j) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = buf[j];
  }
  return X;
}

namespace {

// Appends the intercept column.
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& design) {
  Eigen::MatrixXd X(design.rows(), design.cols() + 1);
  X.leftCols(design.cols()) = design;
  X.col(design.cols()).setOnes();
  return X;
}

void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

}  // namespace

Eigen::MatrixXd LogisticModel::probabilities(const Eigen::MatrixXd& design) const {
  Eigen::MatrixXd logits = with_intercept(design) * coef;
  softmax_rows(logits);
  return logits;
}

LogisticProblem make_logistic_problem(const Eigen::MatrixXd& design,
                                      std::span<const int> labels_1based, int classes) {
  std::map<std::pair<std::vector<double>, int>, double> groups;
  const auto n = design.rows();
  std::vector<double> row(static_cast<std::size_t>(design.cols()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < design.cols(); ++j) row[static_cast<std::size_t>(j)] = design(i, j);
    groups[{row, labels_1based[static_cast<std::size_t>(i)] - 1}] += 1.0;
  }
  LogisticProblem p;
  p.classes = classes;
  p.design.resize(static_cast<Eigen::Index>(groups.size()), design.cols());
  p.weights.resize(static_cast<Eigen::Index>(groups.size()));
  Eigen::Index k = 0;
  for (const auto& [key, count] : groups) {
    for (Eigen::Index j = 0; j < design.cols(); ++j) p.design(k, j) = key.first[static_cast<std::size_t>(j)];
    p.labels.push_back(key.second);
    p.weights(k) = count / static_cast<double>(n);
    ++k;
  }
  p.design = with_intercept(p.design);
  return p;
}

double logistic_objective(const LogisticProblem& problem, const Eigen::MatrixXd& coef,
                          double l2_lambda, Eigen::MatrixXd* gradient) {
  Eigen::MatrixXd probs = problem.design * coef;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double m = probs.row(i).maxCoeff();
    const double lse = m + std::log((probs.row(i).array() - m).exp().sum());
    loss -= problem.weights(i) * (probs(i, problem.labels[static_cast<std::size_t>(i)]) - lse);
    probs.row(i) = (probs.row(i).array() - lse).exp();
  }
  const Eigen::Index p = coef.rows() - 1;
  loss += 0.5 * l2_lambda * coef.topRows(p).squaredNorm();
  if (gradient != nullptr) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      probs(i, problem.labels[static_cast<std::size_t>(i)]) -= 1.0;
      probs.row(i) *= problem.weights(i);
    }
    *gradient = problem.design.transpose() * probs;
    gradient->topRows(p) += l2_lambda * coef.topRows(p);
  }
  return loss;
}

namespace {

LogisticModel fit_problem(const LogisticProblem& problem, Featurizer featurizer, double l2_lambda,
                          int max_iters) {
  LogisticModel model;
  model.featurizer = std::move(featurizer);
  model.l2_lambda = l2_lambda;
  model.coef = Eigen::MatrixXd::Zero(problem.design.cols(), problem.classes);
  // Diagonal preconditioner from the softmax curvature bound plus the ridge term.
  const Eigen::Index p = problem.design.cols() - 1;
  Eigen::VectorXd precond(problem.design.cols());
  for (Eigen::Index j = 0; j < problem.design.cols(); ++j) {
    const double curvature = 0.5 * problem.weights.dot(problem.design.col(j).cwiseAbs2());
    precond(j) = 1.0 / (curvature + (j < p ? l2_lambda : 0.0) + 1e-12);
  }
  Eigen::MatrixXd grad;
  double loss = logistic_objective(problem, model.coef, l2_lambda, &grad);
  double step = 1.0;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (grad.norm() <= 1e-4) break;
    const Eigen::MatrixXd direction = precond.asDiagonal() * grad;
    const double decrease = (direction.array() * grad.array()).sum();
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd trial = model.coef - step * direction;
      Eigen::MatrixXd trial_grad;
      const double trial_loss = logistic_objective(problem, trial, l2_lambda, &trial_grad);
      if (trial_loss <= loss - 0.5 * step * decrease) {
        model.coef = std::move(trial);
        grad = std::move(trial_grad);
        loss = trial_loss;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  model.iterations = it;
  model.gradient_norm = grad.norm();
  model.converged = model.gradient_norm <= 1e-4;
  if (!model.coef.allFinite()) {
    throw Error(ErrorCode::kTrainingFailure, "logistic training produced non-finite coefficients");
  }
  return model;
}

}  // namespace

LogisticModel train_logistic(const TabularDataset& ds, double l2_lambda, int max_iters) {
  if (!ds.has_labels()) throw Error(ErrorCode::kMissingAxis, "training data has no labels");
  if (ds.size() < static_cast<std::size_t>(ds.schema.label_cardinality)) {
    throw Error(ErrorCode::kTrainingFailure, "fewer training rows than classes");
  }
  auto featurizer = Featurizer::fit(ds, true);
  const auto problem =
      make_logistic_problem(featurizer.transform(ds), *ds.labels, ds.schema.label_cardinality);
  return fit_problem(problem, std::move(featurizer), l2_lambda, max_iters);
}

TabularDataset predict(const LogisticModel& model, const TabularDataset& ds) {
  const Eigen::MatrixXd probs = model.probabilities(model.featurizer.transform(ds));
  TabularDataset out = ds;
  const auto L = static_cast<std::size_t>(model.classes());
  std::vector<int> pred(ds.size());
  std::vector<double> flat(ds.size() * L);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    int best = 0;
    for (std::size_t c = 0; c < L; ++c) {
      const double p = probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      flat[r * L + c] = p;
      if (p > flat[r * L + static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    pred[r] = best + 1;
  }
  out.predictions = std::move(pred);
  out.pred_probs = std::move(flat);
  return out;
}

TabularDataset load_predictions(const TabularDataset& ds, const std::filesystem::path& path,
                                std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open " + path.string());
  const int L = ds.schema.label_cardinality;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedRow, "empty predictions file");
  ++line_no;
  auto header = split_csv_line(line);
  if (header.size() != static_cast<std::size_t>(L + 1) || header[0] != "pred") {
    throw Error(ErrorCode::kMalformedRow, "line 1: expected header pred,p_1,...,p_" + std::to_string(L));
  }
  std::vector<int> pred;
  std::vector<double> probs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != static_cast<std::size_t>(L + 1)) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(L + 1) + " fields");
    }
    std::vector<double> row;
    int p = 0;
    try {
      std::size_t used = 0;
      p = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("pred");
      for (int c = 1; c <= L; ++c) {
        row.push_back(std::stod(cells[static_cast<std::size_t>(c)], &used));
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": not numeric");
    }
    if (p < 1 || p > L) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(line_no) + ": prediction outside {1.." + std::to_string(L) + "}");
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": bad probability");
      }
      sum += v;
    }
    if (sum <= 0.0) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": probabilities sum to 0");
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      if (warnings != nullptr) {
        warnings->push_back("line " + std::to_string(line_no) + ": probabilities renormalized");
      }
    }
    for (double& v : row) v /= sum;
    pred.push_back(p);
    probs.insert(probs.end(), row.begin(), row.end());
  }
  if (pred.size() != ds.size()) {
    throw Error(ErrorCode::kRowCountMismatch, "predictions file has " + std::to_string(pred.size()) +
                                                  " rows, dataset has " + std::to_string(ds.size()));
  }
  TabularDataset out = ds;
  out.predictions = std::move(pred);
  out.pred_probs = std::move(probs);
  return out;
}

void write_predictions(const TabularDataset& ds, const std::filesystem::path& path) {
  if (!ds.has_predictions() || !ds.has_probs()) {
    throw Error(ErrorCode::kMissingAxis, "dataset has no predictions to write");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kFileNotFound, "cannot write " + path.string());
  out << "pred";
  for (int c = 1; c <= ds.schema.label_cardinality; ++c) out << ",p_" << c;
  out << '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << (*ds.predictions)[r];
    for (double p : ds.probs(r)) out << ',' << format_double(p);
    out << '\n';
  }
}

}  // namespace shiftscope

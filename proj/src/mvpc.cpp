#include "gha/mvpc.hpp"

#include "gha/baselines.hpp"
#include "gha/core.hpp"
#include "gha/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace gha {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

LinearModel train_svm(const Matrix& features, std::span<const Label> labels, double lambda,
                      std::size_t epochs, std::uint64_t seed) {
  const auto N = static_cast<std::size_t>(features.rows());
  const auto f = features.cols();
  if (N == 0 || f == 0) throw Error(ErrorKind::Shape, "train_svm: empty feature matrix");
  if (labels.size() != N) {
    throw Error(ErrorKind::Shape, "train_svm: " + std::to_string(labels.size()) +
                                      " labels for " + std::to_string(N) + " samples");
  }
  require_finite(features, "train_svm features");
  if (!(lambda > 0.0)) throw Error(ErrorKind::Spec, "train_svm: lambda must be positive");
  if (epochs < 1) throw Error(ErrorKind::Spec, "train_svm: epochs must be >= 1");

  LinearModel model;
  model.classes.assign(labels.begin(), labels.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());
  if (model.classes.size() < 2) {
    throw Error(ErrorKind::Label, "train_svm needs at least 2 classes, got " +
                                      std::to_string(model.classes.size()));
  }
  const auto K = static_cast<Eigen::Index>(model.classes.size());
  std::vector<Eigen::Index> target(N);
  for (std::size_t n = 0; n < N; ++n) {
    target[n] = std::lower_bound(model.classes.begin(), model.classes.end(), labels[n]) -
                model.classes.begin();
  }

  // Column f of the augmented weights multiplies a constant 1 (the bias).
  Matrix w = Matrix::Zero(K, f + 1);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  double t = 0.0;

  const auto hinge_objective = [&] {
    double total = 0.5 * lambda * w.squaredNorm();
    const Matrix scores = (features * w.leftCols(f).transpose()).rowwise() +
                          w.col(f).transpose();
    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n)
      for (Eigen::Index k = 0; k < K; ++k) {
        const double y = target[n] == k ? 1.0 : -1.0;
        loss += std::max(0.0, 1.0 - y * scores(static_cast<Eigen::Index>(n), k));
      }
    return total + loss / static_cast<double>(N);
  };

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t n : order) {
      t += 1.0;
      const double eta = 1.0 / (lambda * t);
      const auto x = features.row(static_cast<Eigen::Index>(n));
      for (Eigen::Index k = 0; k < K; ++k) {
        const double y = target[n] == k ? 1.0 : -1.0;
        const double margin = y * (w.row(k).head(f).dot(x) + w(k, f));
        w.row(k) *= 1.0 - eta * lambda;
        if (margin < 1.0) {
          w.row(k).head(f) += (eta * y) * x;
          w(k, f) += eta * y;
        }
      }
    }
    model.objective_trace.push_back(hinge_objective());
  }

  model.weights = w.leftCols(f);
  model.biases = w.col(f);
  model.train_params = {lambda, epochs};
  model.seed = seed;
  return model;
}

std::vector<Label> predict(const LinearModel& model, const Matrix& features) {
  if (features.cols() != model.weights.cols()) {
    throw Error(ErrorKind::Shape, "predict: model expects " +
                                      std::to_string(model.weights.cols()) + " features, got " +
                                      std::to_string(features.cols()));
  }
  const Matrix scores = (features * model.weights.transpose()).rowwise() +
                        model.biases.transpose();
  std::vector<Label> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index n = 0; n < scores.rows(); ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(n, k) > scores(n, best)) best = k;
    out.push_back(model.classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw Error(ErrorKind::Shape, "accuracy: prediction and truth lengths differ");
  }
  std::size_t hits = 0;
  for (std::size_t n = 0; n < truth.size(); ++n) hits += predicted[n] == truth[n];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::None: return "none";
    case Method::GradHA: return "gradha";
    case Method::Gpa: return "gpa";
    case Method::Pca: return "pca";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "none") return Method::None;
  if (name == "gradha") return Method::GradHA;
  if (name == "gpa") return Method::Gpa;
  if (name == "pca") return Method::Pca;
  throw Error(ErrorKind::Spec, "unknown method '" + name + "' (expected gradha|gpa|pca|none)");
}

FoldArtifacts run_fold(const Dataset& data, std::size_t held_out, Method method,
                       const HyperParams& align_params, const SvmParams& svm_params,
                       const GpaParams& gpa_params, std::uint64_t seed) {
  const std::size_t S = data.size();
  if (held_out >= S) throw Error(ErrorKind::Arity, "held-out index out of range");
  const std::uint64_t fold_seed = seed + held_out;
  const std::size_t T = data.timepoints();
  const std::size_t V = data.voxels();

  Dataset training;
  for (std::size_t i = 0; i < S; ++i)
    if (i != held_out) training.subjects.push_back(data.subjects[i]);
  const SubjectData& test = data.subjects[held_out];

  FoldArtifacts out;
  out.result.held_out_subject = test.subject_id;

  HyperParams params = align_params;
  params.seed = fold_seed;
  const std::size_t f = params.resolved_features(T, V);

  std::vector<Matrix> train_aligned;
  Matrix test_aligned;
  auto start = Clock::now();
  switch (method) {
    case Method::None: {
      for (const auto& s : training.subjects) train_aligned.push_back(standardize_columns(s.matrix));
      test_aligned = standardize_columns(test.matrix);
      break;
    }
    case Method::GradHA: {
      AlignmentModel model = fit(training, params);
      for (std::size_t i = 0; i < training.size(); ++i) {
        train_aligned.push_back(standardize_columns(training.subjects[i].matrix) *
                                model.mappings[i].matrix);
      }
      const Mapping R = align_new_subject(test, model.tmpl, params);
      test_aligned = standardize_columns(test.matrix) * R.matrix;
      out.training_mappings = std::move(model.mappings);
      out.tmpl = std::move(model.tmpl);
      break;
    }
    case Method::Gpa: {
      AlignmentModel model = fit_gpa(training, f, gpa_params.max_iters, gpa_params.tol);
      for (std::size_t i = 0; i < training.size(); ++i) {
        train_aligned.push_back(standardize_columns(training.subjects[i].matrix) *
                                model.mappings[i].matrix);
      }
      const Matrix X = standardize_columns(test.matrix);
      test_aligned = X * procrustes_to_template(X, model.tmpl.matrix).matrix;
      out.training_mappings = std::move(model.mappings);
      out.tmpl = std::move(model.tmpl);
      break;
    }
    case Method::Pca: {
      for (const auto& s : training.subjects) {
        PcaResult pca = pca_reduce(standardize_columns(s.matrix), f);
        train_aligned.push_back(std::move(pca.scores));
        out.training_mappings.push_back(std::move(pca.projection));
      }
      test_aligned = pca_reduce(standardize_columns(test.matrix), f).scores;
      break;
    }
  }
  out.result.align_seconds = seconds_since(start);

  start = Clock::now();
  const auto width = train_aligned.front().cols();
  Matrix train_features(static_cast<Eigen::Index>(training.size() * T), width);
  std::vector<Label> train_labels;
  train_labels.reserve(training.size() * T);
  for (std::size_t i = 0; i < training.size(); ++i) {
    train_features.middleRows(static_cast<Eigen::Index>(i * T), static_cast<Eigen::Index>(T)) =
        train_aligned[i];
    const auto& labels = training.subjects[i].labels;
    train_labels.insert(train_labels.end(), labels.begin(), labels.end());
  }
  out.classifier = train_svm(train_features, train_labels, svm_params.lambda, svm_params.epochs,
                             fold_seed);
  out.result.train_seconds = seconds_since(start);

  start = Clock::now();
  out.predictions = predict(out.classifier, test_aligned);
  out.result.accuracy = accuracy(out.predictions, test.labels);
  out.result.test_seconds = seconds_since(start);

  std::vector<Matrix> all_aligned = std::move(train_aligned);
  all_aligned.insert(all_aligned.begin() + static_cast<std::ptrdiff_t>(held_out), test_aligned);
  out.result.isc_aligned = mean_pairwise_isc(all_aligned);
  return out;
}

CvReport loso_cv(const Dataset& data, Method method, const HyperParams& align_params,
                 const SvmParams& svm_params, std::uint64_t seed, const GpaParams& gpa_params) {
  data.validate();
  const std::size_t S = data.size();
  if (S < 2) throw Error(ErrorKind::Arity, "loso_cv needs at least 2 subjects");

  CvReport report;
  report.method = method;
  report.align_params = align_params;
  report.align_params.features =
      align_params.resolved_features(data.timepoints(), data.voxels());
  report.svm_params = svm_params;
  report.gpa_params = gpa_params;
  report.seed = seed;

  std::vector<Label> classes = data.subjects.front().labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  report.num_classes = classes.size();
  report.chance = classes.empty() ? 0.0 : 1.0 / static_cast<double>(classes.size());

  for (std::size_t s = 0; s < S; ++s) {
    try {
      report.per_fold.push_back(
          run_fold(data, s, method, align_params, svm_params, gpa_params, seed).result);
    } catch (const Error& e) {
      throw e.with_context("fold " + std::to_string(s) + " (held-out subject '" +
                           data.subjects[s].subject_id + "')");
    }
  }

  double sum = 0.0;
  double isc_sum = 0.0;
  for (const auto& fold : report.per_fold) {
    sum += fold.accuracy;
    isc_sum += fold.isc_aligned;
  }
  report.mean_accuracy = sum / static_cast<double>(S);
  report.mean_isc_aligned = isc_sum / static_cast<double>(S);
  double var = 0.0;
  for (const auto& fold : report.per_fold) {
    var += (fold.accuracy - report.mean_accuracy) * (fold.accuracy - report.mean_accuracy);
  }
  report.std_accuracy = std::sqrt(var / static_cast<double>(S));
  return report;
}

}  // namespace gha

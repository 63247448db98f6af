#include "gha/baselines.hpp"

#include "gha/core.hpp"
#include "gha/error.hpp"
#include "gha/linalg.hpp"

#include <Eigen/SVD>

#include <string>

namespace gha {

Mapping procrustes_to_template(const Matrix& X, const Matrix& G) {
  if (X.rows() != G.rows() || G.cols() > X.cols() || G.cols() < 1) {
    throw Error(ErrorKind::Shape, "procrustes_to_template shapes: X " +
                                      std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                                      ", G " + std::to_string(G.rows()) + "x" +
                                      std::to_string(G.cols()));
  }
  const Matrix cross = X.transpose() * G;
  try {
    return {linalg::polar_factor_svd(cross, 0.0)};
  } catch (const Error& e) {
    throw e.with_context("procrustes_to_template: X^T G not of full column rank, minimizer not unique");
  }
}

double template_objective(std::span<const Matrix> matrices, std::span<const Mapping> mappings) {
  if (matrices.empty() || matrices.size() != mappings.size()) {
    throw Error(ErrorKind::Arity, "template_objective: mapping count does not match subjects");
  }
  std::vector<Matrix> mapped;
  mapped.reserve(matrices.size());
  for (std::size_t i = 0; i < matrices.size(); ++i) mapped.push_back(matrices[i] * mappings[i].matrix);
  const Template G = compute_template(mapped);
  double total = 0.0;
  for (const auto& M : mapped) total += (M - G.matrix).squaredNorm();
  return total;
}

double gpa_objective(std::span<const Matrix> matrices, std::span<const Mapping> mappings) {
  if (matrices.empty() || matrices.size() != mappings.size()) {
    throw Error(ErrorKind::Arity, "gpa_objective: mapping count does not match subjects");
  }
  std::vector<Matrix> mapped;
  mapped.reserve(matrices.size());
  for (std::size_t i = 0; i < matrices.size(); ++i) mapped.push_back(matrices[i] * mappings[i].matrix);
  const Template G = compute_template(mapped);
  double total = 0.0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    total += (matrices[i] - G.matrix * mappings[i].matrix.transpose()).squaredNorm();
  }
  return total;
}

AlignmentModel fit_gpa(const Dataset& data, std::size_t features, std::size_t max_iters,
                       double tol) {
  data.validate();
  const std::size_t S = data.size();
  if (S < 2) throw Error(ErrorKind::Arity, "fit_gpa needs at least 2 subjects, got " +
                                               std::to_string(S));
  const std::size_t T = data.timepoints();
  const std::size_t V = data.voxels();
  if (features == 0) features = std::min(T, V);
  if (features > std::min(T, V)) {
    throw Error(ErrorKind::Shape, "feature count " + std::to_string(features) +
                                      " outside [1, " + std::to_string(std::min(T, V)) + "]");
  }
  if (max_iters < 1) throw Error(ErrorKind::Spec, "fit_gpa needs max_iters >= 1");

  std::vector<Matrix> X;
  X.reserve(S);
  double data_energy = 0.0;
  for (const auto& s : data.subjects) {
    X.push_back(standardize_columns(s.matrix));
    data_energy += X.back().squaredNorm();
  }

  AlignmentModel model;
  model.params.features = features;
  model.params.max_iters = max_iters;
  model.params.tau = tol;
  model.params.batch_fraction = 1.0;
  model.mappings.resize(S);

  // Initial template: the first subject in its leading f-dimensional subspace.
  Matrix G = pca_reduce(X[0], features).scores;

  std::vector<Matrix> mapped(S);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < S; ++i) {
      try {
        model.mappings[i] = procrustes_to_template(X[i], G);
      } catch (const Error& e) {
        throw e.with_context("subject '" + data.subjects[i].subject_id + "' at iteration " +
                             std::to_string(iter));
      }
      mapped[i].noalias() = X[i] * model.mappings[i].matrix;
    }
    G = compute_template(mapped).matrix;
    // sum ||X_i - G R_i^T||^2 = sum ||X_i||^2 - S ||G||^2 for orthonormal R_i
    // and G the mean.
    const double objective = data_energy - static_cast<double>(S) * G.squaredNorm();
    model.iterations_run = iter + 1;
    const bool stalled = !model.objective_trace.empty() &&
                         model.objective_trace.back() - objective < tol;
    model.objective_trace.push_back(objective);
    if (stalled) {
      model.converged = true;
      break;
    }
  }
  model.tmpl = {std::move(G)};
  return model;
}

PcaResult pca_reduce(const Matrix& X, std::size_t features) {
  const auto limit = static_cast<std::size_t>(std::min(X.rows(), X.cols()));
  if (features < 1 || features > limit) {
    throw Error(ErrorKind::Shape, "pca_reduce: feature count " + std::to_string(features) +
                                      " outside [1, " + std::to_string(limit) + "]");
  }
  require_finite(X, "pca_reduce input");
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinV);
  const auto f = static_cast<Eigen::Index>(features);
  Matrix projection = svd.matrixV().leftCols(f);
  // Fix the sign so the largest-magnitude entry of each direction is positive.
  for (Eigen::Index c = 0; c < f; ++c) {
    Eigen::Index arg = 0;
    projection.col(c).cwiseAbs().maxCoeff(&arg);
    if (projection(arg, c) < 0) projection.col(c) *= -1.0;
  }
  PcaResult out;
  out.scores = X * projection;
  out.captured_variance = svd.singularValues().head(f).squaredNorm();
  out.projection = {std::move(projection)};
  return out;
}

}  // namespace gha

#include "gha/core.hpp"

#include "gha/error.hpp"

#include <cmath>
#include <string>

namespace gha {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidData: return "invalid-data";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Arity: return "arity";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Label: return "label";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Format: return "format";
  }
  return "unknown";
}

void require_finite(const Matrix& X, const char* what) {
  if (!X.allFinite()) {
    throw Error(ErrorKind::InvalidData, std::string(what) + " contains NaN or Inf");
  }
}

double orthonormality_error(const Matrix& R) {
  const Matrix gram = R.transpose() * R;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void SubjectData::validate() const {
  if (matrix.rows() < 1 || matrix.cols() < 1) {
    throw Error(ErrorKind::Shape, "subject '" + subject_id + "' has an empty matrix");
  }
  if (labels.size() != timepoints()) {
    throw Error(ErrorKind::Shape, "subject '" + subject_id + "' has " +
                                      std::to_string(labels.size()) + " labels for " +
                                      std::to_string(timepoints()) + " time points");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::InvalidData, "subject '" + subject_id + "' contains NaN or Inf");
  }
}

void Dataset::validate() const {
  if (subjects.empty()) throw Error(ErrorKind::Arity, "dataset has no subjects");
  for (const auto& s : subjects) {
    s.validate();
    if (s.timepoints() != timepoints() || s.voxels() != voxels()) {
      throw Error(ErrorKind::Shape, "subject '" + s.subject_id + "' is " +
                                        std::to_string(s.timepoints()) + "x" +
                                        std::to_string(s.voxels()) + ", expected " +
                                        std::to_string(timepoints()) + "x" +
                                        std::to_string(voxels()));
    }
  }
}

Matrix center_columns(const Matrix& X) {
  require_finite(X, "center_columns input");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  Matrix out = X.rowwise() - mean;
  // A second pass removes the O(eps) residual mean left by the first.
  out.rowwise() -= out.colwise().mean();
  return out;
}

Matrix standardize_columns(const Matrix& X) {
  if (X.rows() < 2) {
    throw Error(ErrorKind::Shape, "standardize_columns needs at least 2 rows, got " +
                                      std::to_string(X.rows()));
  }
  Matrix out = center_columns(X);
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double raw_norm = X.col(c).norm();
    const double norm = out.col(c).norm();
    if (norm < 1e-12 * std::max(1.0, raw_norm)) {
      out.col(c).setZero();
    } else {
      out.col(c) /= norm;
    }
  }
  return out;
}

double isc(const Matrix& X, const Matrix& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw Error(ErrorKind::Shape, "isc shape mismatch: " + std::to_string(X.rows()) + "x" +
                                      std::to_string(X.cols()) + " vs " +
                                      std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()));
  }
  if (X.cols() == 0) throw Error(ErrorKind::Shape, "isc of matrices with no columns");
  // trace(X^T Y) without forming the V x V product.
  return X.cwiseProduct(Y).sum() / static_cast<double>(X.cols());
}

double mean_pairwise_isc(std::span<const Matrix> data) {
  if (data.size() < 2) {
    throw Error(ErrorKind::Arity, "mean_pairwise_isc needs at least 2 matrices, got " +
                                      std::to_string(data.size()));
  }
  std::vector<Matrix> standardized;
  standardized.reserve(data.size());
  for (const auto& M : data) {
    if (M.rows() != data[0].rows() || M.cols() != data[0].cols()) {
      throw Error(ErrorKind::Shape, "mean_pairwise_isc inputs differ in shape");
    }
    standardized.push_back(standardize_columns(M));
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < standardized.size(); ++i) {
    for (std::size_t j = i + 1; j < standardized.size(); ++j) {
      total += isc(standardized[i], standardized[j]);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double ha_identity_gap(const Dataset& data, std::span<const Mapping> mappings) {
  const std::size_t S = data.size();
  if (S < 2) throw Error(ErrorKind::Arity, "ha_identity_gap needs at least 2 subjects");
  if (mappings.size() != S) {
    throw Error(ErrorKind::Arity, "ha_identity_gap: " + std::to_string(mappings.size()) +
                                      " mappings for " + std::to_string(S) + " subjects");
  }
  std::vector<Matrix> mapped;
  mapped.reserve(S);
  for (std::size_t i = 0; i < S; ++i) {
    const auto& X = data.subjects[i].matrix;
    const auto& R = mappings[i].matrix;
    if (X.cols() != R.rows() || R.cols() != mappings[0].matrix.cols()) {
      throw Error(ErrorKind::Shape, "ha_identity_gap: mapping " + std::to_string(i) +
                                        " does not fit its subject");
    }
    mapped.push_back(X * R);
  }
  Matrix G = Matrix::Zero(mapped[0].rows(), mapped[0].cols());
  for (const auto& M : mapped) G += M;
  G /= static_cast<double>(S);

  double lhs = 0.0;
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = i + 1; j < S; ++j) lhs += (mapped[i] - mapped[j]).squaredNorm();
  double rhs = 0.0;
  for (const auto& M : mapped) rhs += (M - G).squaredNorm();
  rhs *= static_cast<double>(S);
  return std::abs(lhs - rhs);
}

Dataset standardize_dataset(const Dataset& data) {
  Dataset out;
  out.subjects.reserve(data.size());
  for (const auto& s : data.subjects) {
    out.subjects.push_back({standardize_columns(s.matrix), s.labels, s.subject_id});
  }
  return out;
}

}  // namespace gha

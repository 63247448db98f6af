#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace gha {

// Row-major so that one row is one time point, the unit both batching and
// classification consume.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Label = std::string;

/// One subject's T x V response matrix with per-time-point stimulus labels.
struct SubjectData {
  Matrix matrix;
  std::vector<Label> labels;
  std::string subject_id;

  std::size_t timepoints() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t voxels() const { return static_cast<std::size_t>(matrix.cols()); }

  /// Throws InvalidData / Shape when the invariants do not hold.
  void validate() const;
};

/// Ordered subjects sharing T and V.
struct Dataset {
  std::vector<SubjectData> subjects;

  std::size_t size() const { return subjects.size(); }
  std::size_t timepoints() const { return subjects.empty() ? 0 : subjects.front().timepoints(); }
  std::size_t voxels() const { return subjects.empty() ? 0 : subjects.front().voxels(); }

  void validate() const;
};

/// V x f matrix with orthonormal columns (R^T R = I_f) once orthonormalized.
struct Mapping {
  Matrix matrix;

  std::size_t voxels() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(matrix.cols()); }
};

/// Shared-space template G: T x f, or b x f inside a mini-batch step.
struct Template {
  Matrix matrix;
};

/// max |R^T R - I| over entries.
double orthonormality_error(const Matrix& R);

}  // namespace gha

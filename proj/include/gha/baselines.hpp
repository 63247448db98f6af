#pragma once

#include "gha/gradha.hpp"
#include "gha/types.hpp"

namespace gha {

/// U W^T from the thin SVD X^T G = U S W^T: the orthonormal-column R that
/// maximizes tr(R^T X^T G), i.e. minimizes ||X - G R^T||_F. For square R this
/// is also argmin ||X R - G||_F; for f < V the latter has no closed form
/// because ||X R||_F depends on R.
Mapping procrustes_to_template(const Matrix& X, const Matrix& G);

/// Classical hyperalignment by generalized Procrustes analysis: alternate
/// per-subject procrustes_to_template with the mean template until the
/// objective drops by less than `tol` (a negative `tol` disables the early
/// stop). Subjects are centered and standardized first. The recorded
/// objective is gpa_objective, which both steps minimize exactly.
AlignmentModel fit_gpa(const Dataset& data, std::size_t features, std::size_t max_iters,
                       double tol);

/// Sum over subjects of ||X_i R_i - G||_F^2 with G the mean of X_i R_i.
double template_objective(std::span<const Matrix> matrices, std::span<const Mapping> mappings);

/// Sum over subjects of ||X_i - G R_i^T||_F^2 with G the mean of X_i R_i.
/// Equals template_objective when every R_i is square orthogonal.
double gpa_objective(std::span<const Matrix> matrices, std::span<const Mapping> mappings);

struct PcaResult {
  Mapping projection;  ///< top-f right singular vectors
  Matrix scores;       ///< X * projection
  double captured_variance = 0.0;  ///< sum of the top-f squared singular values
};

/// Per-subject PCA; no shared space is implied.
PcaResult pca_reduce(const Matrix& X, std::size_t features);

}  // namespace gha

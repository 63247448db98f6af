#pragma once

#include "gha/types.hpp"

#include <random>

namespace gha::linalg {

/// Nearest orthonormal-column matrix to M in Frobenius norm, U W^T from the
/// thin SVD M = U S W^T. Throws Degeneracy when the smallest singular value is
/// below `min_singular` (absolute) or below rank tolerance.
Matrix polar_factor_svd(const Matrix& M, double min_singular = 1e-10);

/// Same result as polar_factor_svd computed as M (M^T M)^{-1/2} through the
/// f x f Gram eigendecomposition. Falls back to the SVD route when the Gram
/// matrix is badly conditioned.
Matrix polar_factor(const Matrix& M, double min_singular = 1e-10);

/// rows x cols matrix of independent standard-normal samples.
Matrix standard_normal(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// Random orthonormal-column matrix (Gaussian fill then polar factor).
Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

}  // namespace gha::linalg

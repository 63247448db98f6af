#pragma once

#include "gha/types.hpp"

#include <span>

namespace gha {

/// Subtracts each column's mean.
Matrix center_columns(const Matrix& X);

/// Zero-mean, unit l2-norm columns. Columns with (numerically) zero centered
/// norm become all-zero. Requires T >= 2.
Matrix standardize_columns(const Matrix& X);

/// (1/V) trace(X^T Y).
double isc(const Matrix& X, const Matrix& Y);

/// Mean of isc over all unordered pairs after standardizing each input.
double mean_pairwise_isc(std::span<const Matrix> data);

/// |sum_{i<j} ||X_i R_i - X_j R_j||^2 - S sum_i ||X_i R_i - G||^2|, G the mean
/// of the mapped subjects.
double ha_identity_gap(const Dataset& data, std::span<const Mapping> mappings);

/// Applies center_columns then standardize_columns to every subject. Labels
/// and ids are carried over.
Dataset standardize_dataset(const Dataset& data);

/// Throws InvalidData when any entry is NaN or infinite.
void require_finite(const Matrix& X, const char* what);

}  // namespace gha

#pragma once

#include "gha/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gha {

/// E[logcosh(v)] for standard-normal v.
inline constexpr double kGaussianLogcoshMean = 0.374567207491437974;

/// Tunables of the gradient hyperalignment loop.
struct HyperParams {
  std::size_t features = 0;  ///< f; 0 selects min(T, V)
  double tau = 1e-5;         ///< stop when max_i ||dR_i||_F / sqrt(V f) < tau
  std::size_t max_iters = 500;
  double mu = 0.05;
  double batch_fraction = 0.1;  ///< b = ceil(batch_fraction * T)
  std::uint64_t seed = 0;
  /// Record the full-T objective after every iteration. Costs one S*T*V*f
  /// product per iteration; the runtime benchmark turns it off.
  bool trace_objective = true;

  /// Throws Shape / Spec for out-of-range values given the data size.
  void validate(std::size_t timepoints, std::size_t voxels) const;
  std::size_t resolved_features(std::size_t timepoints, std::size_t voxels) const;
  std::size_t batch_size(std::size_t timepoints) const;
};

struct AlignmentModel {
  std::vector<Mapping> mappings;  ///< order-matched to the training subjects
  Template tmpl;                  ///< full-T template from the final mappings
  HyperParams params;
  std::size_t iterations_run = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

/// Numerically safe log(cosh(x)).
double logcosh(double x) noexcept;

/// S seeded V x f orthonormal mappings; subject i draws from stream seed + i.
std::vector<Mapping> init_mappings(std::size_t voxels, std::size_t features,
                                   std::size_t subjects, std::uint64_t seed);

/// Entrywise mean of the mapped batches.
Template compute_template(std::span<const Matrix> batch_rows);

/// sum over entries of logcosh(G), G = (1/S) sum_i X_i R_i.
double logcosh_objective(const Dataset& data, std::span<const Mapping> mappings);
double logcosh_objective(std::span<const Matrix> matrices, std::span<const Mapping> mappings);

/// R + (mu / b) X_batch^T tanh(G_batch).
Matrix gradient_step(const Matrix& x_batch, const Matrix& mapping, const Matrix& g_batch,
                     double mu, std::size_t batch);

/// Symmetric orthogonalization R (R^T R)^{-1/2}. Throws Degeneracy when R
/// is rank deficient; `who` names the subject in that message.
Mapping reorthogonalize(const Matrix& R, const std::string& who = {});

/// Called after every completed iteration with the 1-based iteration count and
/// the current (reorthogonalized) mappings.
using IterationObserver = std::function<void(std::size_t, std::span<const Mapping>)>;

/// Gradient hyperalignment. Centers and standardizes every subject, then runs
/// mini-batch logcosh ascent with per-step reorthogonalization.
AlignmentModel fit(const Dataset& data, const HyperParams& params,
                   const IterationObserver& observer = {});

/// Maps a new subject onto a frozen template with the same ascent loop.
Mapping align_new_subject(const SubjectData& subject, const Template& tmpl,
                          const HyperParams& params);

/// (mean(logcosh(G)) - E[logcosh(v)])^2. Diagnostic only.
double negentropy_estimate(const Matrix& G);

}  // namespace gha

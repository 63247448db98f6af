#pragma once

#include "gha/types.hpp"

#include <cstdint>

namespace gha {

struct SynthSpec {
  std::size_t subjects = 5;
  std::size_t timepoints = 200;
  std::size_t voxels = 50;
  std::size_t latent_dim = 10;
  std::size_t num_classes = 4;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Class label of every time point: K contiguous blocks, the first T mod K
/// blocks one time point longer.
std::vector<Label> block_labels(std::size_t timepoints, std::size_t num_classes);

/// Shared latent response L (T x k) with class-specific block means plus
/// gaussian perturbation; subject i observes X_i = L W_i^T + sigma E_i with a
/// random orthonormal V x k mixing W_i.
Dataset generate_synthetic(const SynthSpec& spec);

}  // namespace gha

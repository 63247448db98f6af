#include "gha/synth.hpp"

#include "gha/error.hpp"
#include "gha/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gha {

namespace {

// Spread of the class-mean patterns relative to the unit within-class
// perturbation of the latent response.
constexpr double kClassMeanScale = 1.0;

std::string subject_name(std::size_t index, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count - 1).size());
  std::string digits = std::to_string(index);
  return "s" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

void SynthSpec::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::Spec, what); };
  if (subjects < 1) fail("synthetic spec needs at least 1 subject");
  if (timepoints < 2) fail("synthetic spec needs at least 2 time points");
  if (voxels < 1) fail("synthetic spec needs at least 1 voxel");
  if (latent_dim < 1 || latent_dim > std::min(timepoints, voxels)) {
    fail("latent dimension " + std::to_string(latent_dim) + " outside [1, min(T, V)]");
  }
  if (num_classes < 2) fail("synthetic spec needs at least 2 classes");
  if (num_classes > timepoints) fail("more classes than time points");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise sigma must be >= 0");
}

namespace {

std::vector<std::size_t> block_classes(std::size_t timepoints, std::size_t num_classes) {
  std::vector<std::size_t> classes;
  classes.reserve(timepoints);
  const std::size_t base = timepoints / num_classes;
  const std::size_t extra = timepoints % num_classes;
  for (std::size_t k = 0; k < num_classes; ++k) {
    classes.insert(classes.end(), base + (k < extra ? 1 : 0), k);
  }
  return classes;
}

}  // namespace

std::vector<Label> block_labels(std::size_t timepoints, std::size_t num_classes) {
  std::vector<Label> labels;
  labels.reserve(timepoints);
  for (const std::size_t k : block_classes(timepoints, num_classes)) {
    labels.push_back("c" + std::to_string(k));
  }
  return labels;
}

Dataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const auto T = static_cast<Eigen::Index>(spec.timepoints);

  const std::vector<std::size_t> classes = block_classes(spec.timepoints, spec.num_classes);
  const std::vector<Label> labels = block_labels(spec.timepoints, spec.num_classes);
  const Matrix class_means = kClassMeanScale * linalg::standard_normal(spec.num_classes,
                                                                        spec.latent_dim, rng);
  Matrix latent = linalg::standard_normal(spec.timepoints, spec.latent_dim, rng);
  for (Eigen::Index t = 0; t < T; ++t) {
    latent.row(t) += class_means.row(static_cast<Eigen::Index>(classes[static_cast<std::size_t>(t)]));
  }

  Dataset out;
  out.subjects.reserve(spec.subjects);
  for (std::size_t i = 0; i < spec.subjects; ++i) {
    const Matrix mixing = linalg::random_orthonormal(spec.voxels, spec.latent_dim, rng);
    Matrix X = latent * mixing.transpose();
    if (spec.noise_sigma > 0.0) {
      X += spec.noise_sigma * linalg::standard_normal(spec.timepoints, spec.voxels, rng);
    }
    out.subjects.push_back({std::move(X), labels, subject_name(i, spec.subjects)});
  }
  return out;
}

}  // namespace gha

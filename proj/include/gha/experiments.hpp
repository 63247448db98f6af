#pragma once

#include "gha/gradha.hpp"
#include "gha/mvpc.hpp"
#include "gha/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gha {

enum class SweepAxis { FeatureFraction, BatchFraction, Iterations };

const char* to_string(SweepAxis axis) noexcept;
/// Accepts the CLI names features|batch|iters as well as the long names.
SweepAxis parse_axis(const std::string& name);

struct SweepPoint {
  double value = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_isc_aligned = 0.0;
  double seconds = 0.0;
  std::uint64_t fingerprint = 0;  ///< dataset fingerprint after this point ran
  CvReport report;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::BatchFraction;
  Method method = Method::GradHA;
  std::vector<double> grid;
  std::vector<SweepPoint> points;
  std::uint64_t fingerprint = 0;
  HyperParams base_params;
  SvmParams svm_params;
  GpaParams gpa_params;
  std::uint64_t seed = 0;
};

/// Feature count for a feature-fraction grid value: round(fraction * T),
/// clamped to [1, min(T, V)].
std::size_t features_for_fraction(double fraction, std::size_t timepoints, std::size_t voxels);

/// Runs loso_cv once per grid value with only the swept parameter changed.
SweepResult run_sweep(const Dataset& data, Method method, SweepAxis axis,
                      const std::vector<double>& grid, const HyperParams& base_params,
                      const SvmParams& svm_params, std::uint64_t seed,
                      const GpaParams& gpa_params = {});

struct BenchSize {
  std::size_t subjects = 0;
  std::size_t timepoints = 0;
  std::size_t voxels = 0;
  std::size_t features = 0;

  std::string label() const;  ///< "SxTxVxF"
};

/// Parses "SxTxVxF".
BenchSize parse_bench_size(const std::string& text);

struct BenchRow {
  Method method = Method::GradHA;
  BenchSize size;
  double median_seconds = 0.0;
  double seconds_ratio_to_gradha = 0.0;  ///< 0 when gradha was not benchmarked
  std::vector<double> repeat_seconds;
  std::vector<std::size_t> iterations;  ///< per timed repeat
};

struct BenchOptions {
  HyperParams gradha;   ///< features is overridden per size
  GpaParams gpa;
  double noise_sigma = 0.5;
  std::size_t num_classes = 4;
};

BenchOptions default_bench_options();

/// Median fit time over `repeats` timed runs after one discarded warm-up.
std::vector<BenchRow> run_bench(const std::vector<BenchSize>& sizes,
                                const std::vector<Method>& methods, std::size_t repeats,
                                std::uint64_t seed, const BenchOptions& options);

}  // namespace gha

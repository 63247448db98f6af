#include "gha/experiments.hpp"

#include "gha/baselines.hpp"
#include "gha/core.hpp"
#include "gha/dataset_io.hpp"
#include "gha/error.hpp"
#include "gha/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

namespace gha {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_value(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

bool strictly_monotone(const std::vector<double>& grid) {
  if (grid.size() < 2) return true;
  bool increasing = true;
  bool decreasing = true;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    increasing = increasing && grid[i] > grid[i - 1];
    decreasing = decreasing && grid[i] < grid[i - 1];
  }
  return increasing || decreasing;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::FeatureFraction: return "feature_fraction";
    case SweepAxis::BatchFraction: return "batch_fraction";
    case SweepAxis::Iterations: return "iterations";
  }
  return "unknown";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "features" || name == "feature_fraction") return SweepAxis::FeatureFraction;
  if (name == "batch" || name == "batch_fraction") return SweepAxis::BatchFraction;
  if (name == "iters" || name == "iterations") return SweepAxis::Iterations;
  throw Error(ErrorKind::Spec, "unknown sweep axis '" + name + "' (expected features|batch|iters)");
}

std::size_t features_for_fraction(double fraction, std::size_t timepoints, std::size_t voxels) {
  const auto f = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(timepoints)));
  return std::clamp<std::size_t>(f, 1, std::min(timepoints, voxels));
}

SweepResult run_sweep(const Dataset& data, Method method, SweepAxis axis,
                      const std::vector<double>& grid, const HyperParams& base_params,
                      const SvmParams& svm_params, std::uint64_t seed,
                      const GpaParams& gpa_params) {
  data.validate();
  if (grid.empty()) throw Error(ErrorKind::Spec, "sweep grid is empty");
  if (!strictly_monotone(grid)) throw Error(ErrorKind::Spec, "sweep grid must be strictly monotone");
  for (const double v : grid) {
    const bool ok = axis == SweepAxis::Iterations
                        ? (v >= 0.0 && v == std::floor(v))
                        : (v > 0.0 && v <= 1.0);
    if (!ok) {
      throw Error(ErrorKind::Spec, "grid value " + format_value(v) + " invalid for axis " +
                                       to_string(axis));
    }
  }

  SweepResult result;
  result.axis = axis;
  result.method = method;
  result.grid = grid;
  result.fingerprint = io::fingerprint(data);
  result.base_params = base_params;
  result.svm_params = svm_params;
  result.gpa_params = gpa_params;
  result.seed = seed;

  for (const double value : grid) {
    HyperParams params = base_params;
    GpaParams gpa = gpa_params;
    switch (axis) {
      case SweepAxis::FeatureFraction:
        params.features = features_for_fraction(value, data.timepoints(), data.voxels());
        break;
      case SweepAxis::BatchFraction:
        params.batch_fraction = value;
        break;
      case SweepAxis::Iterations:
        params.max_iters = static_cast<std::size_t>(value);
        gpa.max_iters = static_cast<std::size_t>(value);
        break;
    }
    SweepPoint point;
    point.value = value;
    const auto start = Clock::now();
    try {
      point.report = loso_cv(data, method, params, svm_params, seed, gpa);
    } catch (const Error& e) {
      throw e.with_context(std::string("sweep ") + to_string(axis) + " = " + format_value(value));
    }
    point.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    point.mean_accuracy = point.report.mean_accuracy;
    point.std_accuracy = point.report.std_accuracy;
    point.mean_isc_aligned = point.report.mean_isc_aligned;
    point.fingerprint = io::fingerprint(data);
    result.points.push_back(std::move(point));
  }
  return result;
}

std::string BenchSize::label() const {
  return std::to_string(subjects) + "x" + std::to_string(timepoints) + "x" +
         std::to_string(voxels) + "x" + std::to_string(features);
}

BenchSize parse_bench_size(const std::string& text) {
  std::vector<std::size_t> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find('x', pos);
    const std::string piece = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (piece.empty() || !std::all_of(piece.begin(), piece.end(), ::isdigit)) {
      throw Error(ErrorKind::Spec, "bench size '" + text + "' must look like SxTxVxF");
    }
    parts.push_back(std::stoull(piece));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 4) throw Error(ErrorKind::Spec, "bench size '" + text + "' must look like SxTxVxF");
  const BenchSize size{parts[0], parts[1], parts[2], parts[3]};
  if (size.subjects < 2 || size.timepoints < 2 || size.voxels < 1 || size.features < 1 ||
      size.features > std::min(size.timepoints, size.voxels)) {
    throw Error(ErrorKind::Spec, "bench size '" + text + "' needs S >= 2, T >= 2 and 1 <= F <= min(T, V)");
  }
  return size;
}

BenchOptions default_bench_options() {
  BenchOptions options;
  options.gradha.batch_fraction = 0.1;
  options.gradha.max_iters = 100;
  options.gradha.trace_objective = false;
  options.gpa.max_iters = 50;
  options.gpa.tol = -1.0;
  return options;
}

std::vector<BenchRow> run_bench(const std::vector<BenchSize>& sizes,
                                const std::vector<Method>& methods, std::size_t repeats,
                                std::uint64_t seed, const BenchOptions& options) {
  if (repeats < 3) throw Error(ErrorKind::Spec, "bench needs repeats >= 3");
  if (sizes.empty() || methods.empty()) throw Error(ErrorKind::Spec, "bench needs sizes and methods");

  std::vector<BenchRow> rows;
  for (const auto& size : sizes) {
    SynthSpec spec;
    spec.subjects = size.subjects;
    spec.timepoints = size.timepoints;
    spec.voxels = size.voxels;
    spec.latent_dim = size.features;
    spec.num_classes = options.num_classes;
    spec.noise_sigma = options.noise_sigma;
    spec.seed = seed;
    const Dataset data = generate_synthetic(spec);

    const std::size_t first_row = rows.size();
    for (const Method method : methods) {
      BenchRow row;
      row.method = method;
      row.size = size;
      for (std::size_t rep = 0; rep <= repeats; ++rep) {
        const auto start = Clock::now();
        std::size_t iterations = 0;
        switch (method) {
          case Method::GradHA: {
            HyperParams params = options.gradha;
            params.features = size.features;
            params.seed = seed;
            iterations = fit(data, params).iterations_run;
            break;
          }
          case Method::Gpa:
            iterations = fit_gpa(data, size.features, options.gpa.max_iters, options.gpa.tol)
                             .iterations_run;
            break;
          case Method::Pca:
            for (const auto& s : data.subjects) {
              (void)pca_reduce(standardize_columns(s.matrix), size.features);
            }
            iterations = 1;
            break;
          case Method::None:
            (void)standardize_dataset(data);
            break;
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (rep == 0) continue;  // warm-up
        row.repeat_seconds.push_back(seconds);
        row.iterations.push_back(iterations);
      }
      row.median_seconds = median(row.repeat_seconds);
      rows.push_back(std::move(row));
    }
    const auto gradha = std::find_if(rows.begin() + static_cast<std::ptrdiff_t>(first_row), rows.end(),
                                     [](const BenchRow& r) { return r.method == Method::GradHA; });
    if (gradha != rows.end()) {
      const double reference = gradha->median_seconds;
      for (std::size_t i = first_row; i < rows.size(); ++i) {
        rows[i].seconds_ratio_to_gradha = reference > 0.0 ? rows[i].median_seconds / reference : 0.0;
      }
    }
  }
  return rows;
}

}  // namespace gha

#pragma once

#include "gha/gradha.hpp"
#include "gha/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gha {

struct SvmParams {
  double lambda = 1e-3;
  std::size_t epochs = 50;
};

/// One-vs-rest linear classifier: score_k(x) = w_k . x + b_k.
struct LinearModel {
  Matrix weights;   ///< K x f
  Vector biases;    ///< K
  std::vector<Label> classes;
  SvmParams train_params;
  std::uint64_t seed = 0;
  /// Regularized hinge objective (summed over the K binary problems) at the
  /// end of every epoch.
  std::vector<double> objective_trace;
};

/// Pegasos-style stochastic subgradient descent on the L2-regularized hinge
/// loss, one binary problem per class, step 1/(lambda t). The bias is learned
/// as the weight of a constant unit feature.
LinearModel train_svm(const Matrix& features, std::span<const Label> labels, double lambda,
                      std::size_t epochs, std::uint64_t seed);

/// argmax_k of the class scores; ties go to the lowest class index.
std::vector<Label> predict(const LinearModel& model, const Matrix& features);

double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

enum class Method { None, GradHA, Gpa, Pca };

const char* to_string(Method method) noexcept;
/// Throws Spec for unknown names.
Method parse_method(const std::string& name);

/// Settings for the GPA baseline when it runs inside cross-validation.
struct GpaParams {
  std::size_t max_iters = 50;
  double tol = 1e-10;
};

struct FoldResult {
  std::string held_out_subject;
  double accuracy = 0.0;
  double isc_aligned = 0.0;
  double align_seconds = 0.0;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

/// Everything one fold produced, including training-side artifacts so that
/// isolation from the held-out subject can be checked.
struct FoldArtifacts {
  FoldResult result;
  std::vector<Mapping> training_mappings;  ///< empty for Method::None
  std::optional<Template> tmpl;            ///< GradHA and Gpa only
  LinearModel classifier;
  std::vector<Label> predictions;
};

struct CvReport {
  Method method = Method::None;
  std::vector<FoldResult> per_fold;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  ///< population standard deviation over folds
  double mean_isc_aligned = 0.0;
  double chance = 0.0;        ///< 1 / K
  std::size_t num_classes = 0;
  HyperParams align_params;
  SvmParams svm_params;
  GpaParams gpa_params;
  std::uint64_t seed = 0;
};

/// Runs a single leave-one-subject-out fold. Fold seeds are seed + fold.
FoldArtifacts run_fold(const Dataset& data, std::size_t held_out, Method method,
                       const HyperParams& align_params, const SvmParams& svm_params,
                       const GpaParams& gpa_params, std::uint64_t seed);

CvReport loso_cv(const Dataset& data, Method method, const HyperParams& align_params,
                 const SvmParams& svm_params, std::uint64_t seed,
                 const GpaParams& gpa_params = {});

}  // namespace gha

#include "gha/gradha.hpp"

#include "gha/core.hpp"
#include "gha/error.hpp"
#include "gha/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace gha {

namespace {

constexpr std::uint64_t kBatchStreamTag = 0x62617463685f6964ULL;

std::mt19937_64 batch_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kBatchStreamTag),
                    static_cast<std::uint32_t>(kBatchStreamTag >> 32)};
  return std::mt19937_64(seq);
}

/// Draws b distinct time points per iteration; shared by all subjects.
class BatchSampler {
 public:
  BatchSampler(std::size_t timepoints, std::size_t batch, std::uint64_t seed)
      : order_(timepoints), batch_(batch), rng_(batch_engine(seed)) {
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  }

  bool full() const { return batch_ == order_.size(); }

  const std::vector<Eigen::Index>& next() {
    // Partial Fisher-Yates over a persistent permutation.
    for (std::size_t i = 0; i < batch_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order_.size() - 1);
      std::swap(order_[i], order_[pick(rng_)]);
    }
    chosen_.assign(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(batch_));
    std::sort(chosen_.begin(), chosen_.end());
    return chosen_;
  }

 private:
  std::vector<Eigen::Index> order_;
  std::vector<Eigen::Index> chosen_;
  std::size_t batch_;
  std::mt19937_64 rng_;
};

double size_normalized_change(const Matrix& before, const Matrix& after) {
  return (after - before).norm() / std::sqrt(static_cast<double>(before.size()));
}

void require_finite_step(const Matrix& R, std::size_t iteration, const std::string& who) {
  if (!R.allFinite()) {
    throw Error(ErrorKind::Divergence, "non-finite mapping for " + who + " at iteration " +
                                           std::to_string(iteration));
  }
}

}  // namespace

void HyperParams::validate(std::size_t timepoints, std::size_t voxels) const {
  const std::size_t f = resolved_features(timepoints, voxels);
  if (f < 1 || f > std::min(timepoints, voxels)) {
    throw Error(ErrorKind::Shape, "feature count " + std::to_string(f) + " outside [1, " +
                                      std::to_string(std::min(timepoints, voxels)) + "]");
  }
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) {
    throw Error(ErrorKind::Spec, "batch_fraction must lie in (0, 1], got " +
                                     std::to_string(batch_fraction));
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorKind::Spec, "mu must be positive, got " + std::to_string(mu));
  }
  if (!(tau >= 0.0)) throw Error(ErrorKind::Spec, "tau must be non-negative");
}

std::size_t HyperParams::resolved_features(std::size_t timepoints, std::size_t voxels) const {
  return features == 0 ? std::min(timepoints, voxels) : features;
}

std::size_t HyperParams::batch_size(std::size_t timepoints) const {
  const auto b = static_cast<std::size_t>(
      std::ceil(batch_fraction * static_cast<double>(timepoints) - 1e-9));
  return std::clamp<std::size_t>(b, 1, timepoints);
}

double logcosh(double x) noexcept {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

std::vector<Mapping> init_mappings(std::size_t voxels, std::size_t features,
                                   std::size_t subjects, std::uint64_t seed) {
  if (features < 1 || features > voxels) {
    throw Error(ErrorKind::Shape, "init_mappings: feature count " + std::to_string(features) +
                                      " outside [1, " + std::to_string(voxels) + "]");
  }
  if (subjects < 1) throw Error(ErrorKind::Arity, "init_mappings needs at least 1 subject");
  std::vector<Mapping> out;
  out.reserve(subjects);
  for (std::size_t i = 0; i < subjects; ++i) {
    std::mt19937_64 rng(seed + i);
    out.push_back({linalg::random_orthonormal(voxels, features, rng)});
  }
  return out;
}

Template compute_template(std::span<const Matrix> batch_rows) {
  if (batch_rows.empty()) throw Error(ErrorKind::Arity, "compute_template needs >= 1 matrix");
  Matrix G = batch_rows[0];
  for (std::size_t i = 1; i < batch_rows.size(); ++i) {
    if (batch_rows[i].rows() != G.rows() || batch_rows[i].cols() != G.cols()) {
      throw Error(ErrorKind::Shape, "compute_template: input " + std::to_string(i) +
                                        " differs in shape");
    }
    G += batch_rows[i];
  }
  G /= static_cast<double>(batch_rows.size());
  return {std::move(G)};
}

double logcosh_objective(std::span<const Matrix> matrices, std::span<const Mapping> mappings) {
  if (matrices.empty() || matrices.size() != mappings.size()) {
    throw Error(ErrorKind::Arity, "logcosh_objective: " + std::to_string(mappings.size()) +
                                      " mappings for " + std::to_string(matrices.size()) +
                                      " subjects");
  }
  std::vector<Matrix> mapped;
  mapped.reserve(matrices.size());
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (matrices[i].cols() != mappings[i].matrix.rows()) {
      throw Error(ErrorKind::Shape, "logcosh_objective: mapping " + std::to_string(i) +
                                        " does not fit its subject");
    }
    mapped.push_back(matrices[i] * mappings[i].matrix);
  }
  const Template G = compute_template(mapped);
  return G.matrix.unaryExpr([](double x) { return logcosh(x); }).sum();
}

double logcosh_objective(const Dataset& data, std::span<const Mapping> mappings) {
  std::vector<Matrix> matrices;
  matrices.reserve(data.size());
  for (const auto& s : data.subjects) matrices.push_back(s.matrix);
  return logcosh_objective(matrices, mappings);
}

Matrix gradient_step(const Matrix& x_batch, const Matrix& mapping, const Matrix& g_batch,
                     double mu, std::size_t batch) {
  if (x_batch.rows() != g_batch.rows() || x_batch.cols() != mapping.rows() ||
      mapping.cols() != g_batch.cols()) {
    throw Error(ErrorKind::Shape,
                "gradient_step shapes: X " + std::to_string(x_batch.rows()) + "x" +
                    std::to_string(x_batch.cols()) + ", R " + std::to_string(mapping.rows()) +
                    "x" + std::to_string(mapping.cols()) + ", G " +
                    std::to_string(g_batch.rows()) + "x" + std::to_string(g_batch.cols()));
  }
  if (batch == 0) throw Error(ErrorKind::Shape, "gradient_step batch size is zero");
  const Matrix direction = g_batch.array().tanh().matrix();
  Matrix out = mapping;
  out.noalias() += (mu / static_cast<double>(batch)) * (x_batch.transpose() * direction);
  return out;
}

Mapping reorthogonalize(const Matrix& R, const std::string& who) {
  try {
    return {linalg::polar_factor(R)};
  } catch (const Error& e) {
    if (who.empty()) throw;
    throw e.with_context(who);
  }
}

AlignmentModel fit(const Dataset& data, const HyperParams& params,
                   const IterationObserver& observer) {
  data.validate();
  const std::size_t S = data.size();
  if (S < 2) throw Error(ErrorKind::Arity, "fit needs at least 2 subjects, got " +
                                               std::to_string(S));
  const std::size_t T = data.timepoints();
  const std::size_t V = data.voxels();
  params.validate(T, V);
  const std::size_t f = params.resolved_features(T, V);
  const std::size_t b = params.batch_size(T);

  std::vector<Matrix> X;
  X.reserve(S);
  for (const auto& s : data.subjects) X.push_back(standardize_columns(s.matrix));

  AlignmentModel model;
  model.params = params;
  model.params.features = f;
  model.mappings = init_mappings(V, f, S, params.seed);
  if (params.trace_objective) {
    model.objective_trace.push_back(logcosh_objective(X, model.mappings));
  }

  // The mini-batch gradient is scaled by T/b so that each step is an
  // unbiased estimate of mu * X^T tanh(G) over all time points.
  const double step = params.mu * static_cast<double>(T);
  BatchSampler sampler(T, b, params.seed);
  std::vector<Matrix> x_batch(S);
  std::vector<Matrix> mapped(S);

  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    if (sampler.full()) {
      for (std::size_t i = 0; i < S; ++i) mapped[i].noalias() = X[i] * model.mappings[i].matrix;
    } else {
      const auto& rows = sampler.next();
      for (std::size_t i = 0; i < S; ++i) {
        x_batch[i] = X[i](rows, Eigen::all);
        mapped[i].noalias() = x_batch[i] * model.mappings[i].matrix;
      }
    }
    const Template g_batch = compute_template(mapped);

    double max_change = 0.0;
    for (std::size_t i = 0; i < S; ++i) {
      const Matrix& xb = sampler.full() ? X[i] : x_batch[i];
      const std::string who = "subject '" + data.subjects[i].subject_id + "'";
      Matrix updated = gradient_step(xb, model.mappings[i].matrix, g_batch.matrix, step, b);
      require_finite_step(updated, iter, who);
      Mapping next = reorthogonalize(updated, who + " at iteration " + std::to_string(iter));
      require_finite_step(next.matrix, iter, who);
      max_change = std::max(max_change, size_normalized_change(model.mappings[i].matrix,
                                                                next.matrix));
      model.mappings[i] = std::move(next);
    }
    model.iterations_run = iter + 1;
    if (observer) observer(model.iterations_run, model.mappings);
    if (params.trace_objective) {
      const double objective = logcosh_objective(X, model.mappings);
      if (!std::isfinite(objective)) {
        throw Error(ErrorKind::Divergence,
                    "objective became non-finite at iteration " + std::to_string(iter));
      }
      model.objective_trace.push_back(objective);
    }
    if (max_change < params.tau) {
      model.converged = true;
      break;
    }
  }

  for (std::size_t i = 0; i < S; ++i) mapped[i].noalias() = X[i] * model.mappings[i].matrix;
  model.tmpl = compute_template(mapped);
  return model;
}

Mapping align_new_subject(const SubjectData& subject, const Template& tmpl,
                          const HyperParams& params) {
  subject.validate();
  const std::size_t T = subject.timepoints();
  const std::size_t V = subject.voxels();
  if (static_cast<std::size_t>(tmpl.matrix.rows()) != T) {
    throw Error(ErrorKind::Shape, "template has " + std::to_string(tmpl.matrix.rows()) +
                                      " time points, subject '" + subject.subject_id +
                                      "' has " + std::to_string(T));
  }
  const auto f = static_cast<std::size_t>(tmpl.matrix.cols());
  HyperParams resolved = params;
  resolved.features = f;
  resolved.validate(T, V);
  require_finite(tmpl.matrix, "template");
  const std::size_t b = resolved.batch_size(T);
  const Matrix X = standardize_columns(subject.matrix);

  Mapping R = init_mappings(V, f, 1, params.seed).front();
  const double step = params.mu * static_cast<double>(T);
  BatchSampler sampler(T, b, params.seed);
  const std::string who = "subject '" + subject.subject_id + "'";
  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    Matrix updated;
    if (sampler.full()) {
      updated = gradient_step(X, R.matrix, tmpl.matrix, step, b);
    } else {
      const auto& rows = sampler.next();
      updated = gradient_step(X(rows, Eigen::all), R.matrix, tmpl.matrix(rows, Eigen::all),
                              step, b);
    }
    require_finite_step(updated, iter, who);
    Mapping next = reorthogonalize(updated, who + " at iteration " + std::to_string(iter));
    const double change = size_normalized_change(R.matrix, next.matrix);
    R = std::move(next);
    if (change < params.tau) break;
  }
  return R;
}

double negentropy_estimate(const Matrix& G) {
  if (G.size() == 0) throw Error(ErrorKind::Shape, "negentropy_estimate of an empty matrix");
  const double mean = G.unaryExpr([](double x) { return logcosh(x); }).mean();
  const double gap = mean - kGaussianLogcoshMean;
  return gap * gap;
}

}  // namespace gha

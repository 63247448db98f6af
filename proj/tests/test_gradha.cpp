#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gha/core.hpp"
#include "gha/error.hpp"
#include "gha/gradha.hpp"
#include "gha/synth.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <functional>

using namespace gha;
using gha::testing::dataset_of;
using gha::testing::max_abs_diff;
using gha::testing::random_matrix;

namespace {

ErrorKind kind_of(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected gha::Error");
  return ErrorKind::Format;
}

bool bit_identical(const Matrix& A, const Matrix& B) {
  return A.rows() == B.rows() && A.cols() == B.cols() &&
         std::equal(A.data(), A.data() + A.size(), B.data());
}

// Independent composite Simpson quadrature of E[logcosh(v)], v ~ N(0, 1).
double gaussian_logcosh_mean_oracle() {
  const int n = 200000;
  const double a = -40.0, b = 40.0, h = (b - a) / n;
  const auto integrand = [](double x) {
    return std::log(std::cosh(std::min(std::abs(x), 300.0))) * std::exp(-0.5 * x * x) /
           std::sqrt(2.0 * M_PI);
  };
  double sum = integrand(a) + integrand(b);
  for (int i = 1; i < n; ++i) sum += integrand(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("init_mappings") {
  const auto a = init_mappings(6, 3, 4, 42);
  const auto b = init_mappings(6, 3, 4, 42);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(bit_identical(a[i].matrix, b[i].matrix));
    CHECK(orthonormality_error(a[i].matrix) <= 1e-8);
    CHECK(a[i].voxels() == 6);
    CHECK(a[i].features() == 3);
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) CHECK((a[i].matrix - a[j].matrix).norm() > 0.0);
  CHECK(!bit_identical(init_mappings(6, 3, 1, 43)[0].matrix, a[0].matrix));
  CHECK(kind_of([] { init_mappings(3, 4, 1, 0); }) == ErrorKind::Shape);
}

TEST_CASE("compute_template") {
  std::mt19937_64 rng(11);
  const Matrix A = random_matrix(4, 2, rng);
  const std::vector<Matrix> single{A};
  CHECK(bit_identical(compute_template(single).matrix, A));
  const std::vector<Matrix> opposite{A, Matrix(-A)};
  CHECK(compute_template(opposite).matrix.cwiseAbs().maxCoeff() == 0.0);

  const std::vector<Matrix> three{random_matrix(4, 2, rng), random_matrix(4, 2, rng),
                                  random_matrix(4, 2, rng)};
  const Matrix G = compute_template(three).matrix;
  for (int t = 0; t < 4; ++t)
    for (int k = 0; k < 2; ++k) {
      const double mean = (three[0](t, k) + three[1](t, k) + three[2](t, k)) / 3.0;
      CHECK(std::abs(G(t, k) - mean) <= 1e-14);
    }
  const std::vector<Matrix> mismatched{A, Matrix::Zero(4, 3)};
  CHECK(kind_of([&] { compute_template(mismatched); }) == ErrorKind::Shape);
}

TEST_CASE("logcosh_objective") {
  std::mt19937_64 rng(12);
  SUBCASE("zero template") {
    const Dataset d = dataset_of({random_matrix(5, 4, rng), random_matrix(5, 4, rng)});
    const std::vector<Mapping> zeros(2, Mapping{Matrix::Zero(4, 2)});
    CHECK(logcosh_objective(d, zeros) == 0.0);
  }
  SUBCASE("single entry against high-precision values") {
    // log(cosh(x)) to 30 digits.
    const std::pair<double, double> cases[] = {{0.5, 0.120114506958277524631763373510},
                                               {1.0, 0.433780830483027187026494684900},
                                               {2.0, 1.325002747357864430937751196830}};
    for (const auto& [x, expected] : cases) {
      Matrix X(1, 1);
      X << x;
      const std::vector<Mapping> one{Mapping{Matrix::Identity(1, 1)}};
      CHECK(std::abs(logcosh_objective(dataset_of({X}), one) - expected) <= 1e-15);
    }
    CHECK(logcosh(1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("duplicating subjects leaves the objective unchanged") {
    const Matrix A = random_matrix(6, 5, rng), B = random_matrix(6, 5, rng);
    const auto maps = init_mappings(5, 3, 2, 1);
    const std::vector<Mapping> doubled{maps[0], maps[1], maps[0], maps[1]};
    CHECK(std::abs(logcosh_objective(dataset_of({A, B}), maps) -
                   logcosh_objective(dataset_of({A, B, A, B}), doubled)) <= 1e-12);
    CHECK(logcosh_objective(dataset_of({A, B}), maps) >= 0.0);
  }
}

TEST_CASE("gradient_step") {
  std::mt19937_64 rng(13);
  const Matrix X = random_matrix(5, 4, rng);
  const Matrix R = random_matrix(4, 2, rng);
  CHECK(bit_identical(gradient_step(X, R, Matrix::Zero(5, 2), 0.3, 5), R));
  CHECK(bit_identical(gradient_step(X, R, random_matrix(5, 2, rng), 0.0, 5), R));
  CHECK(kind_of([&] { gradient_step(X, R, Matrix::Zero(4, 2), 0.1, 5); }) == ErrorKind::Shape);
  CHECK(kind_of([&] { gradient_step(X, Matrix::Zero(3, 2), Matrix::Zero(5, 2), 0.1, 5); }) ==
        ErrorKind::Shape);

  SUBCASE("matches central finite differences") {
    const std::size_t b = 5;
    const Matrix rest = random_matrix(5, 2, rng, 0.5);  // other subjects' contribution
    const auto objective = [&](const Matrix& Rp) {
      const Matrix G = X * Rp + rest;
      return G.unaryExpr([](double x) { return logcosh(x); }).sum() / static_cast<double>(b);
    };
    const Matrix direction = gradient_step(X, R, X * R + rest, 1.0, b) - R;
    const double h = 1e-6;
    std::uniform_int_distribution<int> row(0, 3), col(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
      const int v = row(rng), k = col(rng);
      Matrix plus = R, minus = R;
      plus(v, k) += h;
      minus(v, k) -= h;
      const double fd = (objective(plus) - objective(minus)) / (2.0 * h);
      const double rel = std::abs(fd - direction(v, k)) /
                         std::max({std::abs(fd), std::abs(direction(v, k)), 1e-8});
      CHECK(rel <= 1e-5);
    }
  }
}

TEST_CASE("full-batch ascent before projection") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int S = 2 + trial % 3, T = 6 + trial % 5, V = 5, f = 1 + trial % 3;
    std::vector<Matrix> X;
    for (int i = 0; i < S; ++i) X.push_back(random_matrix(T, V, rng));
    const Dataset d = dataset_of(X);
    const auto maps = init_mappings(V, f, S, 100 + trial);
    std::vector<Matrix> mapped;
    for (int i = 0; i < S; ++i) mapped.push_back(X[i] * maps[i].matrix);
    const Matrix G = compute_template(mapped).matrix;
    std::vector<Mapping> stepped;
    for (int i = 0; i < S; ++i) stepped.push_back({gradient_step(X[i], maps[i].matrix, G, 1e-3, T)});
    CHECK(logcosh_objective(d, stepped) >= logcosh_objective(d, maps));
  }
}

TEST_CASE("reorthogonalize") {
  std::mt19937_64 rng(15);
  SUBCASE("orthonormal input is a fixed point") {
    const Matrix Q = gha::testing::random_orthonormal_qr(7, 3, rng);
    CHECK(max_abs_diff(reorthogonalize(Q).matrix, Q) <= 1e-12);
  }
  SUBCASE("scaled identity") {
    CHECK(max_abs_diff(reorthogonalize(2.0 * Matrix::Identity(4, 4)).matrix,
                       Matrix::Identity(4, 4)) <= 1e-15);
  }
  SUBCASE("random full-rank input against the SVD oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix R = random_matrix(6, 3, rng);
      const Matrix O = reorthogonalize(R).matrix;
      CHECK(orthonormality_error(O) <= 1e-10);
      CHECK(max_abs_diff(O, gha::testing::jacobi_polar(R)) <= 1e-10);
      for (int probe = 0; probe < 50; ++probe) {
        const Matrix Q = gha::testing::random_orthonormal_qr(6, 3, rng);
        CHECK((R - O).norm() <= (R - Q).norm() + 1e-12);
      }
    }
  }
  SUBCASE("ill-conditioned input still orthonormal") {
    Matrix R = random_matrix(8, 3, rng);
    const Matrix direction = random_matrix(8, 1, rng);
    R.col(2) = R.col(1) + 1e-8 * direction.col(0);
    const Matrix O = reorthogonalize(R).matrix;
    CHECK(orthonormality_error(O) <= 1e-10);
  }
  SUBCASE("rank deficiency names the subject") {
    Matrix R = random_matrix(5, 2, rng);
    R.col(1) = 2.0 * R.col(0);
    std::string message;
    CHECK(kind_of([&] { reorthogonalize(R, "subject 'sub7'"); }, &message) ==
          ErrorKind::Degeneracy);
    CHECK(message.find("sub7") != std::string::npos);
  }
}

TEST_CASE("HyperParams batch size") {
  HyperParams p;
  for (double fraction : {1e-9, 0.01, 0.1, 0.333, 0.5, 0.999, 1.0}) {
    p.batch_fraction = fraction;
    for (std::size_t T : {1u, 2u, 7u, 100u, 301u}) {
      const std::size_t b = p.batch_size(T);
      CHECK(b >= 1);
      CHECK(b <= T);
      CHECK(b == std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * T - 1e-9))));
    }
  }
  p.batch_fraction = 0.1;
  CHECK(p.batch_size(200) == 20);
  p.batch_fraction = 0.0;
  CHECK(kind_of([&] { p.validate(10, 10); }) == ErrorKind::Spec);
  p.batch_fraction = 0.5;
  p.features = 11;
  CHECK(kind_of([&] { p.validate(10, 20); }) == ErrorKind::Shape);
}

namespace {

Dataset recovery_dataset() {
  SynthSpec spec;
  spec.subjects = 5;
  spec.timepoints = 200;
  spec.voxels = 50;
  spec.latent_dim = 10;
  spec.num_classes = 4;
  spec.noise_sigma = 0.0;
  spec.seed = 7;
  return generate_synthetic(spec);
}

std::vector<Matrix> aligned(const Dataset& d, const std::vector<Mapping>& maps) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    out.push_back(standardize_columns(d.subjects[i].matrix) * maps[i].matrix);
  return out;
}

}  // namespace

TEST_CASE("fit") {
  const Dataset data = recovery_dataset();
  HyperParams params;
  params.features = 10;
  params.batch_fraction = 1.0;
  params.mu = 0.05;
  params.max_iters = 500;
  params.seed = 3;

  SUBCASE("zero iterations returns the initialization") {
    HyperParams p = params;
    p.max_iters = 0;
    const AlignmentModel model = fit(data, p);
    CHECK(model.iterations_run == 0);
    CHECK_FALSE(model.converged);
    CHECK(model.objective_trace.size() == 1);
    const auto init = init_mappings(50, 10, 5, 3);
    for (std::size_t i = 0; i < 5; ++i) CHECK(bit_identical(model.mappings[i].matrix, init[i].matrix));
  }
  SUBCASE("noiseless recovery, determinism and model invariants") {
    std::vector<Matrix> raw;
    for (const auto& s : data.subjects) raw.push_back(s.matrix);
    CHECK(mean_pairwise_isc(raw) < 0.2);

    std::size_t observed = 0;
    double worst = 0.0;
    const AlignmentModel model = fit(data, params, [&](std::size_t, std::span<const Mapping> maps) {
      ++observed;
      for (const auto& m : maps) worst = std::max(worst, orthonormality_error(m.matrix));
    });
    CHECK(observed == model.iterations_run);
    CHECK(worst <= 1e-8);
    CHECK(mean_pairwise_isc(aligned(data, model.mappings)) >= 0.99);
    CHECK(model.objective_trace.size() == model.iterations_run + 1);
    CHECK(model.objective_trace.back() > model.objective_trace.front());

    const auto mapped = aligned(data, model.mappings);
    CHECK(max_abs_diff(compute_template(mapped).matrix, model.tmpl.matrix) <= 1e-12);
    CHECK(model.tmpl.matrix.rows() == 200);

    const AlignmentModel again = fit(data, params);
    CHECK(again.iterations_run == model.iterations_run);
    CHECK(again.objective_trace == model.objective_trace);
    for (std::size_t i = 0; i < 5; ++i) CHECK(bit_identical(again.mappings[i].matrix, model.mappings[i].matrix));
    CHECK(bit_identical(again.tmpl.matrix, model.tmpl.matrix));
  }
  SUBCASE("mini-batches keep shapes and orthogonality") {
    HyperParams p = params;
    p.max_iters = 40;
    for (double fraction : {0.01, 0.1, 0.37, 1.0}) {
      p.batch_fraction = fraction;
      double worst = 0.0;
      const AlignmentModel model = fit(data, p, [&](std::size_t, std::span<const Mapping> maps) {
        for (const auto& m : maps) {
          CHECK(m.matrix.rows() == 50);
          CHECK(m.matrix.cols() == 10);
          worst = std::max(worst, orthonormality_error(m.matrix));
        }
      });
      CHECK(worst <= 1e-8);
      CHECK(model.tmpl.matrix.rows() == 200);
    }
  }
  SUBCASE("tau stops early") {
    HyperParams p = params;
    p.tau = 1.0;
    const AlignmentModel model = fit(data, p);
    CHECK(model.converged);
    CHECK(model.iterations_run == 1);
  }
  SUBCASE("errors") {
    Dataset one;
    one.subjects.push_back(data.subjects[0]);
    CHECK(kind_of([&] { fit(one, params); }) == ErrorKind::Arity);
    HyperParams huge = params;
    huge.mu = 1e308;
    std::string message;
    CHECK(kind_of([&] { fit(data, huge); }, &message) == ErrorKind::Divergence);
    CHECK(message.find("iteration 0") != std::string::npos);
  }
}

TEST_CASE("align_new_subject") {
  std::mt19937_64 rng(16);
  const std::size_t T = 60, f = 4, V = 9;
  // H: zero-mean unit-norm columns, so the padded subject is already standardized.
  const Matrix H = standardize_columns(random_matrix(T, f, rng));
  const Matrix Q = gha::testing::random_orthonormal_qr(f, f, rng);
  const Template tmpl{H * Q};
  Matrix X = Matrix::Zero(T, V);
  X.leftCols(f) = H;
  const SubjectData subject = gha::testing::subject(X, "new");

  HyperParams params;
  params.max_iters = 500;
  params.mu = 0.05;
  params.batch_fraction = 0.5;
  params.seed = 9;

  const Matrix before = tmpl.matrix;
  const Mapping R = align_new_subject(subject, tmpl, params);
  CHECK(bit_identical(tmpl.matrix, before));
  CHECK(orthonormality_error(R.matrix) <= 1e-8);
  CHECK((X * R.matrix - tmpl.matrix).norm() <= 0.05 * tmpl.matrix.norm());
  CHECK(bit_identical(align_new_subject(subject, tmpl, params).matrix, R.matrix));

  HyperParams none = params;
  none.max_iters = 0;
  const Mapping init = align_new_subject(subject, tmpl, none);
  CHECK(bit_identical(init.matrix, init_mappings(V, f, 1, 9)[0].matrix));
  CHECK(std::isfinite(isc(standardize_columns(X * init.matrix), tmpl.matrix)));

  const Template wrong{Matrix::Zero(T - 1, f)};
  CHECK(kind_of([&] { align_new_subject(subject, wrong, params); }) == ErrorKind::Shape);
}

TEST_CASE("negentropy_estimate") {
  SUBCASE("pinned gaussian constant matches quadrature") {
    CHECK(std::abs(gaussian_logcosh_mean_oracle() - kGaussianLogcoshMean) <= 1e-12);
  }
  SUBCASE("gaussian sample is near zero") {
    std::mt19937_64 rng(17);
    CHECK(negentropy_estimate(random_matrix(1000, 1000, rng)) <= 1e-4);
  }
  SUBCASE("zero matrix") {
    CHECK(negentropy_estimate(Matrix::Zero(3, 4)) ==
          doctest::Approx(kGaussianLogcoshMean * kGaussianLogcoshMean).epsilon(1e-15));
  }
  SUBCASE("permutation invariance") {
    std::mt19937_64 rng(18);
    const Matrix G = random_matrix(5, 4, rng, 2.0);
    Matrix P = G.reverse();
    CHECK(negentropy_estimate(P) == doctest::Approx(negentropy_estimate(G)).epsilon(1e-15));
  }
  CHECK(kind_of([] { negentropy_estimate(Matrix(0, 0)); }) == ErrorKind::Shape);
}

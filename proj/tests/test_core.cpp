#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gha/core.hpp"
#include "gha/error.hpp"
#include "test_util.hpp"

#include <functional>

#include <limits>

using namespace gha;
using gha::testing::dataset_of;
using gha::testing::random_matrix;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected gha::Error");
  return ErrorKind::Format;
}

}  // namespace

TEST_CASE("center_columns") {
  SUBCASE("constant column becomes zero") {
    Matrix X = Matrix::Constant(4, 1, 3.0);
    CHECK(center_columns(X).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("zero-mean input unchanged") {
    Matrix X(4, 2);
    X << 1, 2, -1, -2, 3, 0.5, -3, -0.5;
    CHECK(gha::testing::max_abs_diff(center_columns(X), X) <= 1e-15);
  }
  SUBCASE("random matrix matches per-column loop") {
    std::mt19937_64 rng(1);
    const Matrix X = random_matrix(5, 3, rng, 4.0) + Matrix::Constant(5, 3, 7.0);
    const Matrix C = center_columns(X);
    for (Eigen::Index c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (Eigen::Index r = 0; r < 5; ++r) mean += X(r, c);
      mean /= 5.0;
      double sum = 0.0;
      for (Eigen::Index r = 0; r < 5; ++r) {
        CHECK(C(r, c) == doctest::Approx(X(r, c) - mean).epsilon(1e-13));
        sum += C(r, c);
      }
      CHECK(std::abs(sum / 5.0) <= 1e-12);
    }
  }
  SUBCASE("non-finite input rejected") {
    Matrix X = Matrix::Zero(3, 2);
    X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(kind_of([&] { center_columns(X); }) == ErrorKind::InvalidData);
  }
}

TEST_CASE("standardize_columns") {
  SUBCASE("alternating column") {
    Matrix X(4, 1);
    X << 1, -1, 1, -1;
    Matrix expected(4, 1);
    expected << 0.5, -0.5, 0.5, -0.5;
    CHECK(gha::testing::max_abs_diff(standardize_columns(X), expected) <= 1e-15);
  }
  SUBCASE("constant column maps to zeros") {
    Matrix X(3, 2);
    X << 1e6, 1, 1e6, 2, 1e6, 4;
    const Matrix S = standardize_columns(X);
    CHECK(S.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(S.col(1).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("random matrix norms are 0 or 1") {
    std::mt19937_64 rng(2);
    Matrix X = random_matrix(6, 4, rng);
    X.col(2).setConstant(-2.5);
    const Matrix S = standardize_columns(X);
    for (Eigen::Index c = 0; c < 4; ++c) {
      double norm2 = 0.0;
      for (Eigen::Index r = 0; r < 6; ++r) norm2 += S(r, c) * S(r, c);
      const double norm = std::sqrt(norm2);
      CHECK((std::abs(norm) <= 1e-12 || std::abs(norm - 1.0) <= 1e-12));
    }
    CHECK(S.col(2).norm() == 0.0);
  }
  SUBCASE("single row is a shape error") {
    CHECK(kind_of([] { standardize_columns(Matrix::Ones(1, 3)); }) == ErrorKind::Shape);
  }
  SUBCASE("idempotent on nondegenerate input") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix S = standardize_columns(random_matrix(7, 5, rng, 3.0));
      CHECK(gha::testing::max_abs_diff(standardize_columns(S), S) <= 1e-12);
    }
  }
  SUBCASE("center then standardize") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix X = random_matrix(9, 6, rng, 10.0);
      X.col(trial % 6).setConstant(trial);
      const Matrix S = standardize_columns(center_columns(X));
      for (Eigen::Index c = 0; c < S.cols(); ++c) {
        CHECK(std::abs(S.col(c).mean()) <= 1e-12);
        const double n = S.col(c).norm();
        CHECK((n <= 1e-12 || std::abs(n - 1.0) <= 1e-12));
      }
    }
  }
}

TEST_CASE("isc") {
  const Matrix I = Matrix::Identity(2, 2);
  Matrix swapped(2, 2);
  swapped << 0, 1, 1, 0;
  CHECK(isc(I, I) == 1.0);
  CHECK(isc(I, swapped) == 0.0);

  std::mt19937_64 rng(5);
  const Matrix X = standardize_columns(random_matrix(8, 5, rng));
  const Matrix Y = standardize_columns(random_matrix(8, 5, rng));
  double trace = 0.0;
  for (int k = 0; k < 5; ++k)
    for (int t = 0; t < 8; ++t) trace += X(t, k) * Y(t, k);
  const double value = isc(X, Y);
  CHECK(std::abs(value - trace / 5.0) <= 1e-12);
  CHECK(value >= -1.0);
  CHECK(value <= 1.0);

  CHECK(kind_of([&] { isc(X, Matrix::Zero(8, 4)); }) == ErrorKind::Shape);

  SUBCASE("unit-norm columns give isc(X, X) = 1") {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix Z = random_matrix(6, 4, rng);
      Z.colwise().normalize();
      CHECK(std::abs(isc(Z, Z) - 1.0) <= 1e-12);
    }
  }
  SUBCASE("bilinear in the first argument") {
    for (double a : {-3.0, 0.25, 7.5}) {
      CHECK(std::abs(isc(a * X, Y) - a * isc(X, Y)) <= 1e-12);
    }
  }
}

TEST_CASE("mean_pairwise_isc") {
  std::mt19937_64 rng(6);
  const Matrix A = random_matrix(10, 3, rng);
  const std::vector<Matrix> same{A, A};
  CHECK(mean_pairwise_isc(same) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix B(4, 2);
  B << 1, 1, -1, 1, 1, -1, -1, -1;
  Matrix C(4, 2);
  C << 1, 1, 1, -1, -1, 1, -1, -1;
  const std::vector<Matrix> three{B, B, C};
  CHECK(mean_pairwise_isc(three) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  std::vector<Matrix> five;
  for (int i = 0; i < 5; ++i) five.push_back(standardize_columns(random_matrix(12, 4, rng)));
  double total = 0.0;
  int pairs = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j, ++pairs) {
      double tr = 0.0;
      for (int t = 0; t < 12; ++t)
        for (int k = 0; k < 4; ++k) tr += five[i](t, k) * five[j](t, k);
      total += tr / 4.0;
    }
  CHECK(pairs == 10);
  CHECK(std::abs(mean_pairwise_isc(five) - total / pairs) <= 1e-12);

  const std::vector<Matrix> one{A};
  CHECK(kind_of([&] { mean_pairwise_isc(one); }) == ErrorKind::Arity);
}

namespace {

// Brute-force sides of the sum-of-pairs / template identity.
std::pair<double, double> identity_sides(const std::vector<Matrix>& X, const std::vector<Matrix>& R) {
  const std::size_t S = X.size();
  std::vector<Matrix> M;
  for (std::size_t i = 0; i < S; ++i) {
    Matrix P = Matrix::Zero(X[i].rows(), R[i].cols());
    for (Eigen::Index t = 0; t < P.rows(); ++t)
      for (Eigen::Index k = 0; k < P.cols(); ++k)
        for (Eigen::Index v = 0; v < X[i].cols(); ++v) P(t, k) += X[i](t, v) * R[i](v, k);
    M.push_back(P);
  }
  double lhs = 0.0;
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = i + 1; j < S; ++j)
      for (Eigen::Index t = 0; t < M[i].rows(); ++t)
        for (Eigen::Index k = 0; k < M[i].cols(); ++k) {
          const double d = M[i](t, k) - M[j](t, k);
          lhs += d * d;
        }
  double rhs = 0.0;
  for (Eigen::Index t = 0; t < M[0].rows(); ++t)
    for (Eigen::Index k = 0; k < M[0].cols(); ++k) {
      double g = 0.0;
      for (std::size_t i = 0; i < S; ++i) g += M[i](t, k);
      g /= static_cast<double>(S);
      for (std::size_t i = 0; i < S; ++i) rhs += (M[i](t, k) - g) * (M[i](t, k) - g);
    }
  return {lhs, static_cast<double>(S) * rhs};
}

}  // namespace

TEST_CASE("ha_identity_gap") {
  std::mt19937_64 rng(7);
  SUBCASE("two subjects, closed form") {
    const Matrix A = random_matrix(6, 3, rng);
    const Matrix B = random_matrix(6, 3, rng);
    const std::vector<Mapping> id(2, Mapping{Matrix::Identity(3, 3)});
    CHECK(ha_identity_gap(dataset_of({A, B}), id) <= 1e-12);
    const Matrix G = (A + B) / 2.0;
    CHECK((A - B).squaredNorm() ==
          doctest::Approx(2.0 * ((A - G).squaredNorm() + (B - G).squaredNorm())).epsilon(1e-13));
  }
  SUBCASE("identical mapped subjects") {
    const Matrix A = random_matrix(5, 4, rng);
    const std::vector<Mapping> id(3, Mapping{Matrix::Identity(4, 4)});
    CHECK(ha_identity_gap(dataset_of({A, A, A}), id) <= 1e-12);
  }
  SUBCASE("five subjects against brute-force sides") {
    std::vector<Matrix> X, R;
    std::vector<Mapping> maps;
    for (int i = 0; i < 5; ++i) {
      X.push_back(random_matrix(12, 9, rng));
      R.push_back(gha::testing::random_orthonormal_qr(9, 4, rng));
      maps.push_back({R.back()});
    }
    const auto [lhs, rhs] = identity_sides(X, R);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, lhs));
    CHECK(ha_identity_gap(dataset_of(X), maps) <= 1e-9 * std::max(1.0, lhs));
  }
  SUBCASE("100 random instances") {
    std::uniform_int_distribution<int> pickS(2, 6), pickT(2, 40), pickV(1, 60), pickf(1, 8);
    for (int trial = 0; trial < 100; ++trial) {
      const int S = pickS(rng), T = pickT(rng), V = pickV(rng);
      const int f = std::min(pickf(rng), V);
      std::vector<Matrix> X;
      std::vector<Mapping> maps;
      for (int i = 0; i < S; ++i) {
        X.push_back(random_matrix(T, V, rng, 3.0));
        maps.push_back({gha::testing::random_orthonormal_qr(V, f, rng)});
      }
      double lhs = 0.0;
      for (int i = 0; i < S; ++i)
        for (int j = i + 1; j < S; ++j)
          lhs += (X[i] * maps[i].matrix - X[j] * maps[j].matrix).squaredNorm();
      CHECK(ha_identity_gap(dataset_of(X), maps) <= 1e-9 * std::max(1.0, lhs));
    }
  }
  SUBCASE("single subject is an arity error") {
    const std::vector<Mapping> id(1, Mapping{Matrix::Identity(2, 2)});
    CHECK(kind_of([&] { ha_identity_gap(dataset_of({Matrix::Ones(3, 2)}), id); }) ==
          ErrorKind::Arity);
  }
}

TEST_CASE("dataset validation") {
  Dataset d = dataset_of({Matrix::Ones(3, 2), Matrix::Ones(3, 3)});
  CHECK(kind_of([&] { d.validate(); }) == ErrorKind::Shape);
  d = dataset_of({Matrix::Ones(3, 2)});
  d.subjects[0].labels.pop_back();
  CHECK(kind_of([&] { d.validate(); }) == ErrorKind::Shape);
}

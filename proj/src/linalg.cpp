#include "gha/linalg.hpp"

#include "gha/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace gha::linalg {

namespace {

std::string describe_singular(double smallest) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", smallest);
  return std::string("matrix is rank deficient (smallest singular value ") + buf + ")";
}

}  // namespace

Matrix polar_factor_svd(const Matrix& M, double min_singular) {
  if (M.cols() > M.rows()) {
    throw Error(ErrorKind::Shape, "polar factor needs rows >= cols, got " +
                                      std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
  }
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smallest = sv.size() ? sv(sv.size() - 1) : 0.0;
  const double largest = sv.size() ? sv(0) : 0.0;
  const double rank_tol = largest * std::numeric_limits<double>::epsilon() *
                          static_cast<double>(std::max(M.rows(), M.cols()));
  if (!(smallest > min_singular) || !(smallest > rank_tol)) {
    throw Error(ErrorKind::Degeneracy, describe_singular(smallest));
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix polar_factor(const Matrix& M, double min_singular) {
  if (M.cols() > M.rows()) {
    throw Error(ErrorKind::Shape, "polar factor needs rows >= cols, got " +
                                      std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
  }
  Matrix gram(M.cols(), M.cols());
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(M.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) return polar_factor_svd(M, min_singular);
  const Vector& lambda = eig.eigenvalues();
  const double smallest = lambda(0);
  const double largest = lambda(lambda.size() - 1);
  // Squaring the singular values loses half the digits; hand ill-conditioned
  // input to the SVD.
  if (!(smallest > largest * 1e-12)) return polar_factor_svd(M, min_singular);
  if (!(std::sqrt(smallest) > min_singular)) {
    throw Error(ErrorKind::Degeneracy, describe_singular(std::sqrt(std::max(smallest, 0.0))));
  }
  const Matrix& E = eig.eigenvectors();
  const Matrix inv_sqrt = E * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * E.transpose();
  return M * inv_sqrt;
}

Matrix standard_normal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = normal(rng);
  return out;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return polar_factor(standard_normal(rows, cols, rng));
}

}  // namespace gha::linalg

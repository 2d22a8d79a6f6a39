#include "lisret/linalg.hpp"

#include "lisret/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace lisret {

namespace {

bool needs_flip(const Eigen::Ref<const Vector>& v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  return v(at) < 0.0;
}

}  // namespace

void fix_column_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    if (needs_flip(vectors.col(j))) vectors.col(j) *= -1.0;
  }
}

SortedEigen sorted_symmetric_eigen(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed");
  }
  // Eigen returns ascending order.
  SortedEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  fix_column_signs(out.vectors);
  return out;
}

RightSvd svd_full_right(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  RightSvd out;
  out.singular_values = svd.singularValues();
  out.left = svd.matrixU();
  out.right = svd.matrixV();
  for (Eigen::Index j = 0; j < out.right.cols(); ++j) {
    if (needs_flip(out.right.col(j))) {
      out.right.col(j) *= -1.0;
      if (j < out.left.cols()) out.left.col(j) *= -1.0;
    }
  }
  return out;
}

Matrix cholesky_lower(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string("Cholesky factorization failed for ") + what +
                         " (matrix not positive definite)");
  }
  return llt.matrixL();
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = normal(rng);
  }
  return z;
}

bool all_finite(const Eigen::Ref<const Matrix>& a) { return a.allFinite(); }

}  // namespace lisret

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace lisret {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Flips each column of `vectors` so its largest-magnitude entry is positive.
/// Gives singular/eigen bases that do not depend on the LAPACK-style sign
/// the decomposition happened to return.
void fix_column_signs(Matrix& vectors);

/// Symmetric eigendecomposition with eigenvalues sorted descending and
/// sign-fixed eigenvectors.
struct SortedEigen {
  Vector values;
  Matrix vectors;
};
SortedEigen sorted_symmetric_eigen(const Matrix& symmetric);

/// Thin wrapper for an SVD with the full right factor, singular values
/// descending, right vectors sign-fixed (left vectors adjusted to match).
struct RightSvd {
  Vector singular_values;  // length min(m, n)
  Matrix left;             // m x min(m, n)
  Matrix right;            // n x n
};
RightSvd svd_full_right(const Matrix& a);

/// Lower Cholesky factor; throws NumericalError when `a` is not SPD.
Matrix cholesky_lower(const Matrix& a, const char* what);

/// Matrix of iid standard normals drawn column by column.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

bool all_finite(const Eigen::Ref<const Matrix>& a);

}  // namespace lisret

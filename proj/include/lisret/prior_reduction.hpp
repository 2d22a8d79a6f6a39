#pragma once

// Truncated-SVD prior reduction: x ~= x0 + P_r alpha with alpha ~ N(0, I)
// and P_r = [sqrt(l_1) u_1, ..., sqrt(l_r) u_r].

#include "lisret/gaussian_model.hpp"

#include <iosfwd>

namespace lisret {

struct PriorBasis {
  Eigen::Index rank = 0;
  Matrix basis;            // n x r
  Vector singular_values;  // all n eigenvalues of Sigma_pr, descending
  Matrix vectors;          // all n unit singular vectors u_i
};

/// Columns ordered by descending singular value; each u_i is flipped so its
/// largest-magnitude entry is positive.
PriorBasis build_prior_basis(const GaussianPrior& prior, Eigen::Index rank);

Vector lift(const Vector& alpha, const PriorBasis& basis, const GaussianPrior& prior);

/// log pi(y | x0 + P_r alpha) - 1/2 |alpha|^2
double reduced_log_posterior_prired(const Vector& alpha, const InverseProblem& problem,
                                    const PriorBasis& basis);

/// CSV "layer,col_0,...,col_{r-1}" of P_r.
void write_basis(std::ostream& out, const Matrix& basis);

}  // namespace lisret

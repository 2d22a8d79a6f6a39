#include "lisret/prior_reduction.hpp"

#include "lisret/errors.hpp"

#include <iomanip>
#include <ostream>
#include <string>

namespace lisret {

PriorBasis build_prior_basis(const GaussianPrior& prior, Eigen::Index rank) {
  const Eigen::Index n = prior.dim();
  if (rank < 1 || rank > n) {
    throw ConfigError("prior-reduction rank " + std::to_string(rank) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  // Sigma_pr is symmetric PSD, so its SVD is its eigendecomposition.
  SortedEigen eig = sorted_symmetric_eigen(prior.covariance());
  PriorBasis out;
  out.rank = rank;
  out.singular_values = eig.values.cwiseMax(0.0);
  out.vectors = std::move(eig.vectors);
  out.basis = out.vectors.leftCols(rank) *
              out.singular_values.head(rank).cwiseSqrt().asDiagonal();
  return out;
}

Vector lift(const Vector& alpha, const PriorBasis& basis, const GaussianPrior& prior) {
  require_dim("rank", basis.rank, alpha.size());
  return prior.mean() + basis.basis * alpha;
}

double reduced_log_posterior_prired(const Vector& alpha, const InverseProblem& problem,
                                    const PriorBasis& basis) {
  return log_likelihood(lift(alpha, basis, problem.prior()), problem) - 0.5 * alpha.squaredNorm();
}

void write_basis(std::ostream& out, const Matrix& basis) {
  out << "layer";
  for (Eigen::Index c = 0; c < basis.cols(); ++c) out << ",col_" << c;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index l = 0; l < basis.rows(); ++l) {
    out << l;
    for (Eigen::Index c = 0; c < basis.cols(); ++c) out << ',' << basis(l, c);
    out << '\n';
  }
}

}  // namespace lisret

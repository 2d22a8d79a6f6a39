#pragma once

// Likelihood-informed subspace (LIS).
//
// With Jt = L_obs^{-1} J L_pr = W S V^T, the leading right singular vectors
// V_r span the directions (in whitened prior coordinates) where the data
// dominates the prior. In state space:
//
//   Phi_r   = L_pr V_r        Theta_r    = L_pr^{-T} V_r
//   Phi_perp = L_pr V_perp    Theta_perp = L_pr^{-T} V_perp
//
// so that Theta^T Phi = I and Phi_r Theta_r^T + Phi_perp Theta_perp^T = I.
// States are split around the prior mean: x = x0 + Phi_r x_r + Phi_perp x_perp,
// which makes both parameter blocks standard normal under the prior.

#include "lisret/gaussian_model.hpp"

#include <cstdint>
#include <optional>

namespace lisret {

/// Either a fixed rank or a singular-value threshold (count of s_i >= tau).
struct RankSelection {
  std::optional<Eigen::Index> rank;
  double threshold = 1.0;

  static RankSelection fixed(Eigen::Index r) { return {r, 1.0}; }
  static RankSelection above(double tau) { return {std::nullopt, tau}; }
};

struct LisBasis {
  Eigen::Index rank = 0;
  Vector singular_values;  // n values, descending; zero-padded when m < n
  Matrix v_r;              // n x r
  Matrix v_perp;           // n x (n - r)
  Matrix phi_r;
  Matrix theta_r;
  Matrix phi_perp;
  Matrix theta_perp;

  Eigen::Index dim() const { return v_r.rows(); }
  /// Pi_r = Phi_r Theta_r^T
  Matrix projection() const { return phi_r * theta_r.transpose(); }
};

/// Whitened Jacobian L_obs^{-1} J(x) L_pr.
Matrix whitened_jacobian(const Vector& x, const InverseProblem& problem);

/// Prior-preconditioned Gauss-Newton Hessian L_pr^T J^T Sigma_obs^{-1} J L_pr,
/// formed as Jt^T Jt.
Matrix pp_hessian(const Vector& x, const InverseProblem& problem);

/// v^T H v / v^T v
double rayleigh(const Vector& v, const Matrix& h_tilde);

/// Mean of whitened Jacobians over the columns of `samples` (n x count).
/// The sum is pairwise in sample-index order, so the result does not depend
/// on how many worker threads evaluate the Jacobians.
Matrix expected_jacobian(const Matrix& samples, const InverseProblem& problem);

LisBasis build_lis(const Matrix& j_hat, const GaussianPrior& prior, const RankSelection& selection);

/// Number of singular values of `j` that are >= tau.
Eigen::Index dof_signal(const Matrix& j, double tau = 1.0);

struct SplitState {
  Vector x_r;
  Vector x_perp;
};

SplitState split(const Vector& x, const LisBasis& basis, const GaussianPrior& prior);
Vector recompose(const Vector& x_r, const Vector& x_perp, const LisBasis& basis,
                 const GaussianPrior& prior);

/// log pi(y | x0 + Phi_r x_r) - 1/2 |x_r|^2
double reduced_log_posterior_lis(const Vector& x_r, const InverseProblem& problem,
                                 const LisBasis& basis);

/// (n - r) x count iid standard normals: the complement prior in whitened
/// coordinates.
Matrix sample_complement(Eigen::Index count, const LisBasis& basis, std::uint64_t seed);

}  // namespace lisret

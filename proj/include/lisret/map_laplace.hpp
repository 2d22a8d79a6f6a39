#pragma once

// Gauss-Newton optimal estimation: MAP point and the Laplace covariance
// (H(x_map) + Sigma_pr^{-1})^{-1}.

#include "lisret/gaussian_model.hpp"

#include <cstdint>

namespace lisret {

struct GaussNewtonConfig {
  int max_iter = 50;
  double step_tol = 1e-8;   // on |dx| / (1 + |x|)
  int max_halvings = 10;
};

struct LaplaceApprox {
  Vector map_point;
  Matrix post_cov;
  Matrix post_chol;
  int iterations = 0;  // linearizations performed
  bool converged = false;
};

/// Iterates x <- x + (H + Sigma_pr^{-1})^{-1} (J^T Sigma_obs^{-1} (y - F(x)) - Sigma_pr^{-1} (x - x0)),
/// halving a step up to `max_halvings` times while it lowers the posterior.
/// The update is solved in whitened prior coordinates, which needs only
/// the Cholesky factor of Sigma_pr. Non-convergence is reported through
/// `converged`, not thrown.
LaplaceApprox gauss_newton_map(const InverseProblem& problem, const Vector& x_init,
                               const GaussNewtonConfig& config = {});

/// n x count draws x_map + post_chol z. Logs a warning for unconverged input.
Matrix laplace_samples(const LaplaceApprox& approx, Eigen::Index count, std::uint64_t seed);

}  // namespace lisret

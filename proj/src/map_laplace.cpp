#include "lisret/map_laplace.hpp"

#include "lisret/errors.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>

namespace lisret {

namespace {

struct Linearization {
  Matrix hessian_plus_identity;  // Jt^T Jt + I in whitened prior coordinates
  Vector gradient;               // Jt^T r~ - z
};

Linearization linearize(const InverseProblem& problem, const Vector& x) {
  const GaussianPrior& prior = problem.prior();
  const Vector predicted = problem.forward().evaluate(x);
  const Vector residual = problem.noise().whiten(problem.data() - predicted);
  const Matrix jt = whiten_jacobian(problem.forward().jacobian(x), prior, problem.noise());
  Linearization out;
  out.hessian_plus_identity = jt.transpose() * jt;
  out.hessian_plus_identity.diagonal().array() += 1.0;
  out.gradient = jt.transpose() * residual - prior.whiten(x);
  return out;
}

}  // namespace

LaplaceApprox gauss_newton_map(const InverseProblem& problem, const Vector& x_init,
                               const GaussNewtonConfig& config) {
  require_dim("state", problem.state_dim(), x_init.size());
  if (!x_init.allFinite()) throw NumericalError("Gauss-Newton start point is not finite");
  const GaussianPrior& prior = problem.prior();
  const auto lower = prior.chol().triangularView<Eigen::Lower>();

  LaplaceApprox out;
  Vector x = x_init;
  double current = log_posterior(x, problem);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    ++out.iterations;
    const Linearization lin = linearize(problem, x);
    Eigen::LLT<Matrix> llt(lin.hessian_plus_identity);
    if (llt.info() != Eigen::Success) throw NumericalError("Gauss-Newton system is not SPD");
    Vector step = lower * llt.solve(lin.gradient);
    if (!step.allFinite()) throw NumericalError("Gauss-Newton produced a non-finite step");

    if (step.norm() / (1.0 + x.norm()) < config.step_tol) {
      x += step;
      out.converged = true;
      break;
    }

    bool improved = false;
    for (int h = 0; h <= config.max_halvings; ++h) {
      const Vector candidate = x + step;
      double value = -std::numeric_limits<double>::infinity();
      try {
        value = log_posterior(candidate, problem);
      } catch (const NumericalError&) {
      }
      if (std::isfinite(value) && value >= current) {
        x = candidate;
        current = value;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    if (!x.allFinite()) throw NumericalError("Gauss-Newton iterate became non-finite");
  }

  const Linearization at_map = linearize(problem, x);
  const Matrix inv = at_map.hessian_plus_identity.llt().solve(
      Matrix::Identity(prior.dim(), prior.dim()));
  Matrix cov = lower * inv * prior.chol().transpose();
  cov = 0.5 * (cov + cov.transpose());
  out.map_point = std::move(x);
  out.post_chol = cholesky_lower(cov, "Laplace posterior covariance");
  out.post_cov = std::move(cov);
  return out;
}

Matrix laplace_samples(const LaplaceApprox& approx, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("Laplace sample count must be >= 1");
  if (!approx.converged) {
    std::clog << "warning: drawing Laplace samples from an unconverged MAP estimate\n";
  }
  std::mt19937_64 rng(seed);
  const Matrix z = standard_normal(approx.map_point.size(), count, rng);
  Matrix out = approx.post_chol.triangularView<Eigen::Lower>() * z;
  out.colwise() += approx.map_point;
  return out;
}

}  // namespace lisret

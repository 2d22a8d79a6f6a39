#pragma once

// Gaussian prior and noise, and the unnormalized log-densities built on them.
// All quadratic forms go through triangular solves against the Cholesky
// factors; no explicit inverses are formed.

#include "lisret/forward_model.hpp"
#include "lisret/linalg.hpp"

#include <iosfwd>
#include <memory>

namespace lisret {

class GaussianPrior {
public:
  /// Factorizes `covariance`; throws NumericalError if it is not SPD.
  GaussianPrior(Vector mean, Matrix covariance);

  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& chol() const { return chol_; }

  /// L^{-1} (x - x0)
  Vector whiten(const Vector& x) const;
  /// x0 + L z
  Vector color(const Vector& z) const;
  /// L^{-T} v, column by column.
  Matrix solve_upper(const Matrix& v) const;

private:
  Vector mean_;
  Matrix covariance_;
  Matrix chol_;
};

class NoiseModel {
public:
  explicit NoiseModel(Matrix covariance);
  static NoiseModel isotropic(Eigen::Index m, double sigma);

  Eigen::Index dim() const { return covariance_.rows(); }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& chol() const { return chol_; }
  bool is_diagonal() const { return diagonal_; }

  /// L_obs^{-1} r, column by column.
  Matrix whiten(const Matrix& r) const;

private:
  Matrix covariance_;
  Matrix chol_;
  Vector sqrt_diag_;
  bool diagonal_ = false;
};

/// y = F(x) + eps, x ~ prior, eps ~ noise.
class InverseProblem {
public:
  InverseProblem(std::shared_ptr<const ForwardOperator> forward, GaussianPrior prior,
                 NoiseModel noise, Vector data);

  const ForwardOperator& forward() const { return *forward_; }
  std::shared_ptr<const ForwardOperator> forward_ptr() const { return forward_; }
  const GaussianPrior& prior() const { return prior_; }
  const NoiseModel& noise() const { return noise_; }
  const Vector& data() const { return data_; }
  Eigen::Index state_dim() const { return prior_.dim(); }
  Eigen::Index data_dim() const { return data_.size(); }

  /// Same problem, different observation.
  InverseProblem with_data(Vector data) const;

private:
  std::shared_ptr<const ForwardOperator> forward_;
  GaussianPrior prior_;
  NoiseModel noise_;
  Vector data_;
};

/// -1/2 (x - x0)^T Sigma_pr^{-1} (x - x0)
double log_prior(const Vector& x, const GaussianPrior& prior);

/// Data misfit eta(x) = 1/2 (y - F(x))^T Sigma_obs^{-1} (y - F(x)).
double misfit(const Vector& x, const InverseProblem& problem);

/// -eta(x)
double log_likelihood(const Vector& x, const InverseProblem& problem);

double log_posterior(const Vector& x, const InverseProblem& problem);

/// L_obs^{-1} J L_pr
Matrix whiten_jacobian(const Matrix& jacobian, const GaussianPrior& prior, const NoiseModel& noise);

/// Sample mean and covariance of `ensemble` (one profile per row), plus
/// jitter * mean(diag) * I on the covariance.
GaussianPrior build_empirical_prior(const Matrix& ensemble, double jitter = 1e-6);

/// Whitespace-separated profiles, one per row. A first row whose leading
/// token is not a number (e.g. "altitude 0.5 1.5 ...") is an altitude
/// header; its numeric fields are returned in `altitudes`. '#' lines are
/// comments.
struct Ensemble {
  Matrix profiles;
  Vector altitudes;  // empty when no header
};
Ensemble read_ensemble(std::istream& in);
void write_ensemble(std::ostream& out, const Matrix& profiles, const Vector& altitudes);

/// CSV "layer,mean,cov_0,...,cov_{n-1}".
void write_prior(std::ostream& out, const GaussianPrior& prior);

}  // namespace lisret

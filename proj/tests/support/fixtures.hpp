#pragma once
// Small random problems shared by the unit and acceptance tests.

#include "lisret/forward_model.hpp"
#include "lisret/gaussian_model.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace lisret::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  return standard_normal(rows, cols, rng);
}

/// A A^T / n + shift * I, comfortably SPD.
inline Matrix random_spd(Eigen::Index n, std::mt19937_64& rng, double shift = 0.5) {
  const Matrix a = standard_normal(n, n, rng);
  return a * a.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
}

/// Linear-Gaussian problem y = G x + b + eps with dense prior and noise.
struct LinearCase {
  std::shared_ptr<LinearModel> model;
  InverseProblem problem;
  Vector post_mean;
  Matrix post_cov;
};

inline LinearCase make_linear_case(const Matrix& g, const Vector& offset, const Vector& mean,
                                   const Matrix& prior_cov, const Matrix& noise_cov,
                                   const Vector& data) {
  auto model = std::make_shared<LinearModel>(g, offset);
  InverseProblem problem(model, GaussianPrior(mean, prior_cov), NoiseModel(noise_cov), data);
  const Matrix noise_inv = noise_cov.inverse();
  const Matrix prec = g.transpose() * noise_inv * g + prior_cov.inverse();
  const Matrix post_cov = prec.inverse();
  const Vector post_mean =
      post_cov * (g.transpose() * noise_inv * (data - offset) + prior_cov.inverse() * mean);
  return {model, std::move(problem), post_mean, post_cov};
}

inline LinearCase random_linear_case(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  const Matrix g = standard_normal(m, n, rng);
  const Vector offset = standard_normal(m, 1, rng);
  const Vector mean = standard_normal(n, 1, rng);
  const Matrix prior_cov = random_spd(n, rng);
  const Matrix noise_cov = random_spd(m, rng, 1.0);
  const Vector data = standard_normal(m, 1, rng);
  return make_linear_case(g, offset, mean, prior_cov, noise_cov, data);
}

/// Small Beer-Lambert setup with random nonnegative cross-sections, one
/// background gas and a nontrivial instrument polynomial.
struct SmallSpectral {
  SpectralSetup setup;
  AtmosphericGrid grid;
};

inline SmallSpectral random_spectral(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AtmosphericGrid grid = AtmosphericGrid::uniform(0.0, 10.0, n);
  SpectralSetup s;
  s.wavelengths = Vector::LinSpaced(m, 1600.0, 1601.0);
  s.solar_intensity = Vector::NullaryExpr(m, [&] { return 0.5 + u(rng); });
  Matrix c0 = Matrix::NullaryExpr(m, n, [&] { return 0.1 * u(rng); });
  Matrix c1 = Matrix::NullaryExpr(m, n, [&] { return 0.02 * u(rng); });
  s.cross_sections = {c0, c1};
  s.background_profiles = {Vector::Constant(n, 0.5)};
  s.instrument = {1e-7, -2e-4, 1.1, 0.05};
  return {std::move(s), std::move(grid)};
}

/// Gaussian law of x = x0 + B z (plus an independent prior block C w when
/// `complement` is nonempty) with z conditioned on the data of a linear problem.
struct ReducedGaussian {
  Vector mean;
  Matrix cov;
  Vector z_mean;
  Matrix z_cov;
};

inline ReducedGaussian reduced_linear_posterior(const InverseProblem& p, const Matrix& g,
                                                const Matrix& basis, const Matrix& complement) {
  const Matrix noise_inv = p.noise().covariance().inverse();
  const Matrix gb = g * basis;
  Matrix prec = gb.transpose() * noise_inv * gb;
  prec.diagonal().array() += 1.0;
  ReducedGaussian law;
  law.z_cov = prec.inverse();
  const Vector resid = p.data() - p.forward().evaluate(p.prior().mean());
  law.z_mean = law.z_cov * gb.transpose() * noise_inv * resid;
  law.mean = p.prior().mean() + basis * law.z_mean;
  law.cov = basis * law.z_cov * basis.transpose();
  if (complement.cols() > 0) law.cov += complement * complement.transpose();
  return law;
}

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(standard_normal(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// Linear problem whose whitened Jacobian has singular values
/// top * decay^i and whose prior spectrum decays as 0.8^i.
inline LinearCase decaying_linear_case(Eigen::Index m, Eigen::Index n, double top, double decay,
                                       std::mt19937_64& rng) {
  const Matrix q = random_orthogonal(n, rng);
  Vector spectrum(n);
  for (Eigen::Index i = 0; i < n; ++i) spectrum(i) = std::pow(0.8, static_cast<double>(i));
  const Matrix prior_cov = q * spectrum.asDiagonal() * q.transpose();
  const Vector x0 = Vector::Ones(n);
  const double sigma = 0.1;
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = top * std::pow(decay, static_cast<double>(i));
  const Matrix w = random_orthogonal(m, rng).leftCols(n);
  const Matrix v = random_orthogonal(n, rng);
  const Matrix l_pr = prior_cov.llt().matrixL();
  const Matrix g = sigma * w * s.asDiagonal() * v.transpose() * l_pr.inverse();
  const Vector truth = x0 + l_pr * standard_normal(n, 1, rng);
  const Vector y = g * truth + sigma * standard_normal(m, 1, rng);
  return make_linear_case(g, Vector::Zero(m), x0, prior_cov, sigma * sigma * Matrix::Identity(m, m), y);
}

}  // namespace lisret::testing

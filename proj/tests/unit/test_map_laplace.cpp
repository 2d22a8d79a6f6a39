#include "fixtures.hpp"

#include "lisret/map_laplace.hpp"
#include "lisret/synthetic.hpp"

#include <doctest.h>

using namespace lisret;

TEST_CASE("linear model: exact conjugate posterior after one step") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = testing::random_linear_case(12, 10, rng);
    const LaplaceApprox a = gauss_newton_map(c.problem, c.problem.prior().mean());
    CHECK(a.converged);
    CHECK(a.iterations <= 2);
    CHECK((a.map_point - c.post_mean).norm() < 1e-8 * (1.0 + c.post_mean.norm()));
    CHECK((a.post_cov - c.post_cov).norm() < 1e-8 * c.post_cov.norm());
    CHECK((a.post_chol * a.post_chol.transpose() - a.post_cov).norm() < 1e-10 * a.post_cov.norm());
  }
}

TEST_CASE("data at the prior mean keeps the MAP there") {
  std::mt19937_64 rng(42);
  auto [setup, grid] = testing::random_spectral(15, 5, rng);
  auto model = std::make_shared<BeerLambertModel>(setup, grid);
  const Vector x0 = Vector::Ones(5);
  const InverseProblem p(model, GaussianPrior(x0, 0.05 * Matrix::Identity(5, 5)),
                         NoiseModel::isotropic(15, 1e-3), model->evaluate(x0));
  const LaplaceApprox a = gauss_newton_map(p, x0);
  CHECK(a.converged);
  CHECK((a.map_point - x0).norm() < 1e-10);
}

TEST_CASE("Laplace covariance never exceeds the prior") {
  std::mt19937_64 rng(43);
  auto c = testing::random_linear_case(6, 4, rng);
  const LaplaceApprox a = gauss_newton_map(c.problem, c.problem.prior().mean());
  const Vector gap = sorted_symmetric_eigen(c.problem.prior().covariance() - a.post_cov).values;
  CHECK(gap.minCoeff() > -1e-10);
}

TEST_CASE("synthetic problem converges") {
  const SyntheticConfig config;
  const SyntheticSetup s = synth_setup(config);
  auto model = std::make_shared<BeerLambertModel>(s.setup, s.grid);
  const GaussianPrior prior = default_prior(s.grid, config);
  const NoiseModel noise = default_noise(*model, config);
  std::mt19937_64 rng(44);
  const Vector truth = prior.color(standard_normal(prior.dim(), 1, rng));
  const Vector y = model->evaluate(truth) + noise.chol() * standard_normal(noise.dim(), 1, rng);
  const InverseProblem p(model, prior, noise, y);
  GaussNewtonConfig cfg;
  cfg.max_iter = 20;
  const LaplaceApprox a = gauss_newton_map(p, prior.mean(), cfg);
  CHECK(a.converged);
  CHECK(a.iterations <= 20);
  CHECK(log_posterior(a.map_point, p) >= log_posterior(prior.mean(), p));
}

TEST_CASE("Laplace draws") {
  std::mt19937_64 rng(45);
  auto c = testing::random_linear_case(5, 3, rng);
  const LaplaceApprox a = gauss_newton_map(c.problem, c.problem.prior().mean());
  const Matrix draws = laplace_samples(a, 20000, 3);
  CHECK(draws.rows() == 3);
  const Vector mean = draws.rowwise().mean();
  const Vector se = (a.post_cov.diagonal() / 20000.0).cwiseSqrt();
  CHECK(((mean - a.map_point).cwiseAbs().array() < 4.0 * se.array()).all());
  CHECK(laplace_samples(a, 10, 3) == laplace_samples(a, 10, 3));
  CHECK(laplace_samples(a, 10, 3) != laplace_samples(a, 10, 4));
}

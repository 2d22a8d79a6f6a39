#include "fixtures.hpp"

#include "lisret/errors.hpp"
#include "lisret/gaussian_model.hpp"
#include "lisret/synthetic.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace lisret;

TEST_CASE("prior factorization and log density") {
  std::mt19937_64 rng(11);
  const Matrix cov = testing::random_spd(5, rng);
  const Vector mean = standard_normal(5, 1, rng);
  const GaussianPrior prior(mean, cov);
  CHECK((prior.chol() * prior.chol().transpose() - cov).norm() / cov.norm() < 1e-10);
  CHECK(log_prior(mean, prior) == 0.0);

  const GaussianPrior unit(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK(log_prior(Eigen::Vector2d(3, 4), unit) == doctest::Approx(-12.5));

  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = standard_normal(5, 1, rng);
    const double oracle = -0.5 * (x - mean).dot(cov.inverse() * (x - mean));
    CHECK(std::abs(log_prior(x, prior) - oracle) < 1e-10 * (1.0 + std::abs(oracle)));
  }
  CHECK((prior.color(prior.whiten(mean + Vector::Ones(5))) - (mean + Vector::Ones(5))).norm() < 1e-12);
  CHECK_THROWS_AS(GaussianPrior(Vector::Zero(2), -Matrix::Identity(2, 2)), NumericalError);
  CHECK_THROWS_AS(GaussianPrior(Vector::Zero(3), Matrix::Identity(2, 2)), DimensionError);
}

TEST_CASE("likelihood and posterior") {
  auto scalar = std::make_shared<LinearModel>(Matrix::Identity(1, 1), Vector::Zero(1));
  const InverseProblem p(scalar, GaussianPrior(Vector::Zero(1), Matrix::Identity(1, 1)),
                         NoiseModel::isotropic(1, 2.0), Vector::Constant(1, 2.0));
  CHECK(log_likelihood(Vector::Zero(1), p) == doctest::Approx(-0.5));
  CHECK(log_likelihood(Vector::Constant(1, 2.0), p) == 0.0);

  std::mt19937_64 rng(12);
  auto c = testing::random_linear_case(4, 3, rng);
  const Matrix g = c.model->operator_matrix();
  const Matrix noise_inv = c.problem.noise().covariance().inverse();
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = standard_normal(3, 1, rng);
    const Vector r = c.problem.data() - g * x - c.model->offset();
    CHECK(log_likelihood(x, c.problem) == doctest::Approx(-0.5 * r.dot(noise_inv * r)).epsilon(1e-10));
    CHECK(log_posterior(x, c.problem) ==
          doctest::Approx(log_prior(x, c.problem.prior()) + log_likelihood(x, c.problem)).epsilon(1e-12));
  }

  SUBCASE("posterior vanishes at the mean with matching data") {
    const Vector x0 = c.problem.prior().mean();
    const InverseProblem q = c.problem.with_data(c.model->evaluate(x0));
    CHECK(std::abs(log_posterior(x0, q)) < 1e-12);
  }

  SUBCASE("shifting data and model together changes nothing") {
    const Vector shift = Vector::Constant(4, 3.5);
    auto shifted = std::make_shared<LinearModel>(g, c.model->offset() + shift);
    const InverseProblem q(shifted, c.problem.prior(), c.problem.noise(), c.problem.data() + shift);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = standard_normal(3, 1, rng);
      CHECK(log_posterior(x, q) == doctest::Approx(log_posterior(x, c.problem)).epsilon(1e-10));
    }
  }
}

TEST_CASE("whitened Jacobian") {
  const GaussianPrior unit(Vector::Zero(3), Matrix::Identity(3, 3));
  const NoiseModel unit_noise(Matrix::Identity(3, 3));
  std::mt19937_64 rng(13);
  const Matrix j = standard_normal(3, 3, rng);
  CHECK(whiten_jacobian(j, unit, unit_noise) == j);

  const GaussianPrior wide(Vector::Zero(3), 4.0 * Matrix::Identity(3, 3));
  CHECK(whiten_jacobian(Matrix::Identity(3, 3), wide, unit_noise).isApprox(2.0 * Matrix::Identity(3, 3)));

  const GaussianPrior prior(Vector::Zero(3), testing::random_spd(3, rng));
  const NoiseModel noise(testing::random_spd(3, rng));
  const Matrix oracle = noise.chol().inverse() * j * prior.chol();
  CHECK((whiten_jacobian(j, prior, noise) - oracle).norm() < 1e-10 * oracle.norm());
  CHECK(NoiseModel::isotropic(3, 0.5).is_diagonal());
  CHECK_THROWS_AS(NoiseModel::isotropic(3, 0.0), ConfigError);
}

TEST_CASE("empirical prior") {
  Matrix twins(2, 3);
  twins << 1, 2, 3, 1, 2, 3;
  const GaussianPrior flat = build_empirical_prior(twins, 1e-3);
  CHECK(flat.mean() == Eigen::Vector3d(1, 2, 3));
  CHECK(flat.covariance().isApprox(1e-3 * Matrix::Identity(3, 3)));

  std::mt19937_64 rng(14);
  const Matrix iid = standard_normal(20000, 4, rng);
  const GaussianPrior p = build_empirical_prior(iid, 0.0);
  CHECK((p.covariance() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.05);
  CHECK_THROWS_AS(build_empirical_prior(iid.topRows(1)), ConfigError);

  SUBCASE("bundled-style ensemble has a smoothly decaying spectrum") {
    const AtmosphericGrid grid = AtmosphericGrid::uniform(0.0, 50.0, 50);
    const GaussianPrior prior = default_prior(grid, SyntheticConfig{});
    const Vector s = sorted_symmetric_eigen(prior.covariance()).values;
    for (int i = 0; i < 19; ++i) {
      CHECK(s(i + 1) <= s(i));
      CHECK(s(i + 1) > 0.1 * s(i));
    }
  }
}

TEST_CASE("ensemble text format") {
  std::istringstream in("# comment\naltitude 1 2 3\n1 2 3\n4 5 6\n");
  const Ensemble e = read_ensemble(in);
  CHECK(e.profiles.rows() == 2);
  CHECK(e.altitudes == Eigen::Vector3d(1, 2, 3));

  std::stringstream buf;
  write_ensemble(buf, e.profiles, e.altitudes);
  const Ensemble back = read_ensemble(buf);
  CHECK(back.profiles == e.profiles);

  std::istringstream ragged("1 2 3\n4 5\n");
  CHECK_THROWS_AS(read_ensemble(ragged), IoError);
  std::istringstream plain("1 2\n3 4\n");
  CHECK(read_ensemble(plain).altitudes.size() == 0);
}

TEST_CASE("bundled ensemble file matches the generator") {
  std::ifstream in(std::string(LISRET_SOURCE_DIR) + "/data/default_ensemble.txt");
  REQUIRE(in);
  const Ensemble bundled = read_ensemble(in);
  const AtmosphericGrid grid = AtmosphericGrid::uniform(0.0, 50.0, 50);
  CHECK(bundled.profiles == generate_ensemble(grid, EnsembleConfig{}));
  CHECK(bundled.altitudes == grid.midpoints());
}

TEST_CASE("prior peaks at its mean and whitening matches the preconditioned Hessian") {
  std::mt19937_64 rng(15);
  const GaussianPrior prior(standard_normal(4, 1, rng), testing::random_spd(4, rng));
  for (int trial = 0; trial < 100; ++trial) {
    CHECK(log_prior(prior.mean() + 0.1 * standard_normal(4, 1, rng), prior) < 0.0);
  }
  const NoiseModel noise(testing::random_spd(6, rng));
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix j = standard_normal(6, 4, rng);
    const Matrix jt = whiten_jacobian(j, prior, noise);
    const Matrix oracle =
        prior.chol().transpose() * j.transpose() * noise.covariance().inverse() * j * prior.chol();
    CHECK((jt.transpose() * jt - oracle).cwiseAbs().maxCoeff() < 1e-9 * oracle.cwiseAbs().maxCoeff());
  }
}

#include "lisret/errors.hpp"
#include "lisret/mcmc.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace lisret;

TEST_CASE("standard normal target in two dimensions") {
  SamplerConfig cfg;
  cfg.chain_length = 50000;
  cfg.burn_in = 5000;
  cfg.seed = 11;
  const Chain chain = run_am([](const Vector& x) { return -0.5 * x.squaredNorm(); },
                             Eigen::Vector2d(3, -3), cfg);
  const Matrix s = chain.after_burn_in(cfg.burn_in);
  const Vector mean = s.colwise().mean();
  const Matrix centered = s.rowwise() - s.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(s.rows() - 1);
  CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);
  CHECK(chain.acceptance_rate(cfg.burn_in) > 0.2);
  CHECK(chain.acceptance_rate(cfg.burn_in) < 0.6);
  CHECK(chain.wall_time_seconds > 0.0);
  CHECK(chain.adaptation_failures == 0);
}

TEST_CASE("flat target accepts every proposal") {
  SamplerConfig cfg;
  cfg.chain_length = 2000;
  cfg.burn_in = 0;
  const Chain chain = run_am([](const Vector&) { return 0.0; }, Vector::Zero(3), cfg);
  CHECK(chain.acceptance_rate(1) == 1.0);
}

TEST_CASE("bimodal mixture keeps its weights") {
  // 3:1 mixture of N(-2, 0.5^2) and N(2, 0.5^2)
  auto logp = [](const Vector& x) {
    const double a = std::log(0.75) - 2.0 * (x(0) + 2.0) * (x(0) + 2.0);
    const double b = std::log(0.25) - 2.0 * (x(0) - 2.0) * (x(0) - 2.0);
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  };
  SamplerConfig cfg;
  cfg.chain_length = 200000;
  cfg.burn_in = 20000;
  cfg.initial_proposal_cov = Matrix::Constant(1, 1, 4.0);
  cfg.seed = 5;
  const Chain chain = run_am(logp, Vector::Zero(1), cfg);
  const Matrix s = chain.after_burn_in(cfg.burn_in);
  const double left = static_cast<double>((s.col(0).array() < 0.0).count()) / static_cast<double>(s.rows());
  CHECK(left == doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("determinism and failure handling") {
  SamplerConfig cfg;
  cfg.chain_length = 3000;
  cfg.burn_in = 500;
  cfg.seed = 9;
  auto logp = [](const Vector& x) { return -0.5 * x.squaredNorm() - std::pow(x(0), 4); };
  const Chain a = run_am(logp, Vector::Zero(3), cfg);
  const Chain b = run_am(logp, Vector::Zero(3), cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.accepted == b.accepted);
  cfg.seed = 10;
  CHECK(run_am(logp, Vector::Zero(3), cfg).samples != a.samples);

  auto holes = [](const Vector& x) {
    return x(0) > 1.0 ? std::numeric_limits<double>::quiet_NaN() : -0.5 * x.squaredNorm();
  };
  const Chain h = run_am(holes, Vector::Zero(2), cfg);
  CHECK(h.nan_rejections > 0);
  CHECK((h.samples.col(0).array() <= 1.0).all());

  auto throwing = [](const Vector& x) {
    if (x(0) < -1.0) throw NumericalError("outside");
    return -0.5 * x.squaredNorm();
  };
  const Chain t = run_am(throwing, Vector::Zero(2), cfg);
  CHECK(t.nan_rejections > 0);

  CHECK_THROWS_AS(run_am(holes, Eigen::Vector2d(2, 0), cfg), NumericalError);
  SamplerConfig bad = cfg;
  bad.burn_in = bad.chain_length;
  CHECK_THROWS_AS(run_am(logp, Vector::Zero(3), bad), ConfigError);
}

TEST_CASE("chain CSV round trip") {
  SamplerConfig cfg;
  cfg.chain_length = 100;
  cfg.burn_in = 10;
  const Chain a = run_am([](const Vector& x) { return -0.5 * x.squaredNorm(); }, Vector::Zero(2), cfg);
  const auto path = std::filesystem::temp_directory_path() / "lisret_chain_roundtrip.csv";
  write_chain(path, a.samples);
  CHECK(read_chain(path) == a.samples);
  std::filesystem::remove(path);
}

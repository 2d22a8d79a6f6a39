#include "lisret/mcmc.hpp"

#include "lisret/errors.hpp"
#include "lisret/text_io.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace lisret {

namespace {

double safe_log_density(const LogDensity& f, const Vector& x, bool& failed) {
  double value = std::numeric_limits<double>::quiet_NaN();
  try {
    value = f(x);
  } catch (const NumericalError&) {
  }
  failed = std::isnan(value);
  return failed ? -std::numeric_limits<double>::infinity() : value;
}

// Running mean and (unnormalized) scatter matrix, Welford style.
class RunningMoments {
public:
  explicit RunningMoments(Eigen::Index d) : mean_(Vector::Zero(d)), scatter_(Matrix::Zero(d, d)) {}

  void add(const Vector& x) {
    ++count_;
    const Vector delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    scatter_.noalias() += delta * (x - mean_).transpose();
  }

  Eigen::Index count() const { return count_; }
  Matrix covariance() const {
    Matrix c = scatter_ / static_cast<double>(count_ > 1 ? count_ - 1 : 1);
    return 0.5 * (c + c.transpose());
  }

private:
  Eigen::Index count_ = 0;
  Vector mean_;
  Matrix scatter_;
};

}  // namespace

void SamplerConfig::validate(Eigen::Index dim) const {
  if (chain_length < 1) throw ConfigError("chain length must be >= 1");
  if (burn_in < 0 || burn_in >= chain_length) {
    throw ConfigError("burn-in must satisfy 0 <= burn_in < chain_length");
  }
  if (adapt_start < 1) throw ConfigError("adapt_start must be >= 1");
  if (adapt_interval < 1) throw ConfigError("adapt_interval must be >= 1");
  if (!(regularization_eps > 0.0)) throw ConfigError("regularization eps must be > 0");
  if (initial_proposal_cov.size() != 0) {
    require_dim("proposal", dim, initial_proposal_cov.rows());
    require_dim("proposal", dim, initial_proposal_cov.cols());
  }
}

double Chain::acceptance_rate(Eigen::Index from) const {
  const Eigen::Index first = std::max<Eigen::Index>(from, 1);
  if (first >= length()) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index t = first; t < length(); ++t) hits += accepted[static_cast<std::size_t>(t)];
  return static_cast<double>(hits) / static_cast<double>(length() - first);
}

Matrix Chain::after_burn_in(Eigen::Index burn_in) const {
  if (burn_in < 0 || burn_in >= length()) throw ConfigError("burn-in outside the chain");
  return samples.bottomRows(length() - burn_in);
}

Chain run_am(const LogDensity& log_target, const Vector& x_init, const SamplerConfig& config) {
  const Eigen::Index d = x_init.size();
  if (d < 1) throw ConfigError("sampler needs a nonempty start point");
  config.validate(d);
  if (!x_init.allFinite()) throw NumericalError("sampler start point is not finite");

  bool failed = false;
  double current_lp = safe_log_density(log_target, x_init, failed);
  if (!std::isfinite(current_lp)) {
    throw NumericalError("log target is not finite at the start point");
  }

  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const Matrix initial = config.initial_proposal_cov.size() ? config.initial_proposal_cov
                                                             : Matrix::Identity(d, d);
  Matrix proposal_chol = cholesky_lower(initial, "initial proposal covariance");
  const double scale = 2.38 * 2.38 / static_cast<double>(d);

  Chain chain;
  chain.dimension = d;
  chain.samples.resize(config.chain_length, d);
  chain.log_densities.resize(config.chain_length);
  chain.accepted.assign(static_cast<std::size_t>(config.chain_length), 0);

  Vector current = x_init;
  Vector z(d);
  RunningMoments moments(d);

  chain.samples.row(0) = current.transpose();
  chain.log_densities(0) = current_lp;
  moments.add(current);

  for (Eigen::Index t = 1; t < config.chain_length; ++t) {
    if (t >= config.adapt_start && (t - config.adapt_start) % config.adapt_interval == 0) {
      Matrix cov = scale * moments.covariance();
      cov.diagonal().array() += config.regularization_eps;
      Eigen::LLT<Matrix> llt(cov);
      if (llt.info() == Eigen::Success) {
        proposal_chol = llt.matrixL();
      } else {
        ++chain.adaptation_failures;
      }
    }

    for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
    const Vector candidate = current + proposal_chol.triangularView<Eigen::Lower>() * z;
    const double candidate_lp = safe_log_density(log_target, candidate, failed);
    if (failed) ++chain.nan_rejections;
    const double log_u = std::log(uniform(rng));
    if (log_u < candidate_lp - current_lp) {
      current = candidate;
      current_lp = candidate_lp;
      chain.accepted[static_cast<std::size_t>(t)] = 1;
    }
    chain.samples.row(t) = current.transpose();
    chain.log_densities(t) = current_lp;
    moments.add(current);
  }

  chain.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return chain;
}

void write_chain(const std::filesystem::path& path, const Matrix& samples,
                 const std::vector<std::string>& labels) {
  std::vector<std::string> header = labels;
  if (header.empty()) {
    for (Eigen::Index i = 0; i < samples.cols(); ++i) header.push_back("x" + std::to_string(i));
  }
  write_csv(path, header, samples);
}

Matrix read_chain(const std::filesystem::path& path) { return read_csv(path).values; }

}  // namespace lisret

#pragma once

// Adaptive Metropolis random-walk sampler over an arbitrary
// unnormalized log-density.

#include "lisret/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace lisret {

using LogDensity = std::function<double(const Vector&)>;

struct SamplerConfig {
  Eigen::Index chain_length = 100000;  // N_M
  Eigen::Index burn_in = 20000;
  Eigen::Index adapt_start = 1000;
  Eigen::Index adapt_interval = 100;
  Matrix initial_proposal_cov;  // d x d; empty means identity
  double regularization_eps = 1e-10;
  std::uint64_t seed = 1;

  /// Burn-in of 20% of the chain length.
  static Eigen::Index default_burn_in(Eigen::Index chain_length) { return chain_length / 5; }

  void validate(Eigen::Index dim) const;
};

struct Chain {
  Matrix samples;                      // N_M x d, one state per row
  Vector log_densities;                // N_M
  std::vector<std::uint8_t> accepted;  // per step; step 0 is the start point
  double wall_time_seconds = 0.0;      // t_M
  Eigen::Index dimension = 0;
  Eigen::Index nan_rejections = 0;
  Eigen::Index adaptation_failures = 0;  // proposal Cholesky failures (adaptation frozen)

  Eigen::Index length() const { return samples.rows(); }
  /// Fraction of accepted proposals over steps [from, N_M).
  double acceptance_rate(Eigen::Index from = 0) const;
  /// Rows [burn_in, N_M).
  Matrix after_burn_in(Eigen::Index burn_in) const;
};

/// Random-walk Metropolis with Gaussian proposals. From step `adapt_start`
/// on, every `adapt_interval` steps the proposal covariance is reset to
/// (2.38^2 / d) * Cov(chain so far) + eps * I, using a running mean and
/// covariance. A NaN (or a numerical error) from the target rejects the
/// proposal and is counted. Deterministic for a fixed seed.
Chain run_am(const LogDensity& log_target, const Vector& x_init, const SamplerConfig& config);

/// CSV with header "x0,...,x{d-1}" (or `labels`), one sample per row.
void write_chain(const std::filesystem::path& path, const Matrix& samples,
                 const std::vector<std::string>& labels = {});
Matrix read_chain(const std::filesystem::path& path);

}  // namespace lisret

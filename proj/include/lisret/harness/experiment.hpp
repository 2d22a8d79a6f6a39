#pragma once

// The end-to-end retrieval pipeline shared by the CLI and the acceptance
// suite: problem assembly, synthetic measurement, MAP/Laplace, reduced or
// full-space adaptive MCMC, and lifting of reduced chains to state space.

#include "lisret/diagnostics.hpp"
#include "lisret/harness/config.hpp"
#include "lisret/prior_reduction.hpp"

#include <memory>
#include <optional>

namespace lisret::harness {

struct ProblemContext {
  SyntheticSetup synthetic;
  std::shared_ptr<const BeerLambertModel> model;
  GaussianPrior prior;
  NoiseModel noise;
  Matrix ensemble;  // profiles the prior was built from
};

/// Synthetic setup plus the prior (from `ensemble_file` when set, otherwise
/// the generated ensemble) and the default noise model.
ProblemContext build_context(const ExperimentConfig& config);

struct Measurement {
  Vector truth;
  Vector noiseless;
  Vector noisy;
};

/// x_true ~ prior, y = F(x_true) + eps with eps ~ N(0, Sigma_obs);
/// y = F(x_true) exactly when `noise_free`.
Measurement simulate_measurement(const ProblemContext& ctx, std::uint64_t truth_seed,
                                 std::uint64_t noise_seed, bool noise_free);

InverseProblem make_problem(const ProblemContext& ctx, const Vector& data);

/// Everything computed once per observation and shared by all methods/ranks.
struct RetrievalReference {
  LaplaceApprox laplace;
  Matrix j_hat;  // empty until `ensure_lis_jacobian`
};

RetrievalReference prepare_reference(const InverseProblem& problem, const GaussNewtonConfig& map);

/// Averages whitened Jacobians over `count` Laplace draws (once).
void ensure_lis_jacobian(RetrievalReference& ref, const InverseProblem& problem,
                         Eigen::Index count, std::uint64_t seed);

struct RetrievalResult {
  Method method = Method::full;
  Eigen::Index rank = 0;        // state dimension for the full method
  Chain chain;                  // raw chain in sampled coordinates
  Eigen::Index burn_in = 0;
  Matrix reduced_samples;       // post burn-in, sampled coordinates
  Matrix full_samples;          // post burn-in, lifted to state space
  EssReport ess;                // on the sampled coordinates
  Matrix basis;                 // n x r: P_r or Phi_r (empty for full)
  Vector spectrum;              // prior or whitened-Jacobian singular values
};

struct RunOptions {
  Method method = Method::full;
  RankSelection selection;
  SamplerSection sampler;
  std::uint64_t sampler_seed = 1;
  std::uint64_t complement_seed = 2;
};

/// Runs one method end to end. For LIS `ref.j_hat` must be populated.
RetrievalResult run_retrieval(const InverseProblem& problem, const RetrievalReference& ref,
                              const RunOptions& options);

/// Column labels "layer_0".."layer_{n-1}" or "x_r0".. for reduced chains.
std::vector<std::string> state_labels(Eigen::Index n, const std::string& prefix);

}  // namespace lisret::harness

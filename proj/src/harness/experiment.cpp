#include "lisret/harness/experiment.hpp"

#include "lisret/errors.hpp"
#include "lisret/lis.hpp"

#include <fstream>
#include <random>

namespace lisret::harness {

namespace {

// (2.38^2 / r) (I + B^T H(x) B)^{-1}: the Laplace covariance of the reduced
// coordinates z in x = x0 + B z, scaled for a random-walk proposal.
Matrix reduced_proposal(const InverseProblem& problem, const Vector& x, const Matrix& basis) {
  const Matrix jw = problem.noise().whiten(problem.forward().jacobian(x) * basis);
  Matrix precision = jw.transpose() * jw;
  precision.diagonal().array() += 1.0;
  const Eigen::Index r = basis.cols();
  const Matrix cov = precision.llt().solve(Matrix::Identity(r, r));
  return (2.38 * 2.38 / static_cast<double>(r)) * 0.5 * (cov + cov.transpose());
}

SamplerConfig sampler_config(const SamplerSection& s, std::uint64_t seed, Matrix proposal) {
  SamplerConfig c;
  c.chain_length = s.chain_length;
  c.burn_in = s.effective_burn_in();
  c.adapt_start = s.adapt_start;
  c.adapt_interval = s.adapt_interval;
  c.regularization_eps = s.regularization_eps;
  c.seed = seed;
  c.initial_proposal_cov = std::move(proposal);
  return c;
}

}  // namespace

ProblemContext build_context(const ExperimentConfig& config) {
  SyntheticSetup synthetic = synth_setup(config.problem);
  auto model = std::make_shared<const BeerLambertModel>(synthetic.setup, synthetic.grid);

  Matrix ensemble;
  if (!config.ensemble_file.empty()) {
    std::ifstream in(config.ensemble_file);
    if (!in) throw IoError("cannot open ensemble file '" + config.ensemble_file.string() + "'");
    ensemble = read_ensemble(in).profiles;
    require_dim("layer", synthetic.grid.layer_count(), ensemble.cols());
  } else {
    ensemble = generate_ensemble(synthetic.grid, config.problem.ensemble);
  }
  GaussianPrior prior = build_empirical_prior(ensemble, config.problem.jitter);
  NoiseModel noise = default_noise(*model, config.problem);
  return {std::move(synthetic), std::move(model), std::move(prior), std::move(noise),
          std::move(ensemble)};
}

Measurement simulate_measurement(const ProblemContext& ctx, std::uint64_t truth_seed,
                                 std::uint64_t noise_seed, bool noise_free) {
  Measurement m;
  std::mt19937_64 truth_rng(truth_seed);
  m.truth = ctx.prior.color(standard_normal(ctx.prior.dim(), 1, truth_rng).col(0));
  m.noiseless = ctx.model->evaluate(m.truth);
  if (noise_free) {
    m.noisy = m.noiseless;
  } else {
    std::mt19937_64 noise_rng(noise_seed);
    const Vector z = standard_normal(ctx.noise.dim(), 1, noise_rng).col(0);
    m.noisy = m.noiseless + ctx.noise.chol().triangularView<Eigen::Lower>() * z;
  }
  return m;
}

InverseProblem make_problem(const ProblemContext& ctx, const Vector& data) {
  return InverseProblem(ctx.model, ctx.prior, ctx.noise, data);
}

RetrievalReference prepare_reference(const InverseProblem& problem, const GaussNewtonConfig& map) {
  RetrievalReference ref;
  ref.laplace = gauss_newton_map(problem, problem.prior().mean(), map);
  return ref;
}

void ensure_lis_jacobian(RetrievalReference& ref, const InverseProblem& problem,
                         Eigen::Index count, std::uint64_t seed) {
  if (ref.j_hat.size() != 0) return;
  ref.j_hat = expected_jacobian(laplace_samples(ref.laplace, count, seed), problem);
}

RetrievalResult run_retrieval(const InverseProblem& problem, const RetrievalReference& ref,
                              const RunOptions& options) {
  const GaussianPrior& prior = problem.prior();
  const Vector& x_map = ref.laplace.map_point;
  const Eigen::Index n = problem.state_dim();

  RetrievalResult out;
  out.method = options.method;
  out.burn_in = options.sampler.effective_burn_in();

  switch (options.method) {
    case Method::full: {
      out.rank = n;
      const LogDensity target = [&problem](const Vector& x) { return log_posterior(x, problem); };
      const Matrix proposal = (2.38 * 2.38 / static_cast<double>(n)) * ref.laplace.post_cov;
      out.chain = run_am(target, x_map,
                         sampler_config(options.sampler, options.sampler_seed, proposal));
      out.reduced_samples = out.chain.after_burn_in(out.burn_in);
      out.full_samples = out.reduced_samples;
      break;
    }
    case Method::lis: {
      if (ref.j_hat.size() == 0) throw ConfigError("LIS retrieval needs the averaged Jacobian");
      const LisBasis basis = build_lis(ref.j_hat, prior, options.selection);
      out.rank = basis.rank;
      out.basis = basis.phi_r;
      out.spectrum = basis.singular_values;
      const LogDensity target = [&problem, &basis](const Vector& xr) {
        return reduced_log_posterior_lis(xr, problem, basis);
      };
      const Vector start = split(x_map, basis, prior).x_r;
      out.chain = run_am(target, start,
                         sampler_config(options.sampler, options.sampler_seed,
                                        reduced_proposal(problem, x_map, basis.phi_r)));
      out.reduced_samples = out.chain.after_burn_in(out.burn_in);
      const Eigen::Index count = out.reduced_samples.rows();
      Matrix lifted = out.reduced_samples * basis.phi_r.transpose();
      if (basis.rank < n) {
        lifted += sample_complement(count, basis, options.complement_seed).transpose() *
                  basis.phi_perp.transpose();
      }
      lifted.rowwise() += prior.mean().transpose();
      out.full_samples = std::move(lifted);
      break;
    }
    case Method::prired: {
      if (!options.selection.rank) {
        throw ConfigError("prior reduction needs an explicit rank");
      }
      const PriorBasis basis = build_prior_basis(prior, *options.selection.rank);
      out.rank = basis.rank;
      out.basis = basis.basis;
      out.spectrum = basis.singular_values;
      const LogDensity target = [&problem, &basis](const Vector& alpha) {
        return reduced_log_posterior_prired(alpha, problem, basis);
      };
      // Least-squares coordinates of the MAP point in the truncated basis.
      const Vector start = basis.singular_values.head(basis.rank).cwiseInverse().asDiagonal() *
                           (basis.basis.transpose() * (x_map - prior.mean()));
      out.chain = run_am(target, start,
                         sampler_config(options.sampler, options.sampler_seed,
                                        reduced_proposal(problem, x_map, basis.basis)));
      out.reduced_samples = out.chain.after_burn_in(out.burn_in);
      Matrix lifted = out.reduced_samples * basis.basis.transpose();
      lifted.rowwise() += prior.mean().transpose();
      out.full_samples = std::move(lifted);
      break;
    }
  }
  out.ess = ess_report(out.reduced_samples, out.chain.wall_time_seconds);
  return out;
}

std::vector<std::string> state_labels(Eigen::Index n, const std::string& prefix) {
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return labels;
}

}  // namespace lisret::harness

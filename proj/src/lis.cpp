#include "lisret/lis.hpp"

#include "lisret/errors.hpp"

#include <algorithm>
#include <future>
#include <random>
#include <string>
#include <thread>

namespace lisret {

namespace {

// Sum of whitened Jacobians of columns [first, last), split at the midpoint.
Matrix pairwise_sum(const Matrix& samples, const InverseProblem& problem, Eigen::Index first,
                    Eigen::Index last, int spawn_depth) {
  const Eigen::Index count = last - first;
  if (count == 1) return whitened_jacobian(samples.col(first), problem);
  const Eigen::Index mid = first + count / 2;
  if (spawn_depth > 0) {
    auto left = std::async(std::launch::async, [&] {
      return pairwise_sum(samples, problem, first, mid, spawn_depth - 1);
    });
    Matrix right = pairwise_sum(samples, problem, mid, last, spawn_depth - 1);
    return left.get() + right;
  }
  return pairwise_sum(samples, problem, first, mid, 0) +
         pairwise_sum(samples, problem, mid, last, 0);
}

int spawn_depth_for_hardware() {
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  int depth = 0;
  while ((1u << depth) < threads && depth < 6) ++depth;
  return depth;
}

}  // namespace

Matrix whitened_jacobian(const Vector& x, const InverseProblem& problem) {
  return whiten_jacobian(problem.forward().jacobian(x), problem.prior(), problem.noise());
}

Matrix pp_hessian(const Vector& x, const InverseProblem& problem) {
  const Matrix jt = whitened_jacobian(x, problem);
  Matrix h = jt.transpose() * jt;
  return 0.5 * (h + h.transpose());
}

double rayleigh(const Vector& v, const Matrix& h_tilde) {
  require_dim("state", h_tilde.rows(), v.size());
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 0.0)) throw NumericalError("Rayleigh quotient of the zero vector");
  return v.dot(h_tilde * v) / norm2;
}

Matrix expected_jacobian(const Matrix& samples, const InverseProblem& problem) {
  if (samples.cols() < 1) throw ConfigError("expected_jacobian needs at least one sample");
  require_dim("state", problem.state_dim(), samples.rows());
  const int depth = samples.cols() > 8 ? spawn_depth_for_hardware() : 0;
  return pairwise_sum(samples, problem, 0, samples.cols(), depth) /
         static_cast<double>(samples.cols());
}

Eigen::Index dof_signal(const Matrix& j, double tau) {
  if (j.size() == 0) return 0;
  const Vector s = Eigen::JacobiSVD<Matrix>(j).singularValues();
  return (s.array() >= tau).count();
}

LisBasis build_lis(const Matrix& j_hat, const GaussianPrior& prior,
                   const RankSelection& selection) {
  const Eigen::Index n = prior.dim();
  require_dim("state", n, j_hat.cols());
  if (!j_hat.allFinite()) throw NumericalError("averaged Jacobian has non-finite entries");
  const RightSvd svd = svd_full_right(j_hat);
  const Eigen::Index k = svd.singular_values.size();

  Eigen::Index r = 0;
  if (selection.rank) {
    r = *selection.rank;
    if (r < 1) throw ConfigError("LIS rank must be >= 1");
    if (r > k) {
      throw ConfigError("LIS rank " + std::to_string(r) + " exceeds min(m, n) = " +
                        std::to_string(k));
    }
  } else {
    r = (svd.singular_values.array() >= selection.threshold).count();
    if (r == 0) {
      throw NumericalError("no singular value reaches the threshold " +
                           std::to_string(selection.threshold) +
                           "; no informative directions, supply the rank manually");
    }
  }

  LisBasis out;
  out.rank = r;
  out.singular_values = Vector::Zero(n);
  out.singular_values.head(k) = svd.singular_values;
  out.v_r = svd.right.leftCols(r);
  out.v_perp = svd.right.rightCols(n - r);
  const auto lower = prior.chol().triangularView<Eigen::Lower>();
  out.phi_r = lower * out.v_r;
  out.phi_perp = lower * out.v_perp;
  out.theta_r = prior.solve_upper(out.v_r);
  out.theta_perp = prior.solve_upper(out.v_perp);
  return out;
}

SplitState split(const Vector& x, const LisBasis& basis, const GaussianPrior& prior) {
  require_dim("state", basis.dim(), x.size());
  const Vector centered = x - prior.mean();
  return {basis.theta_r.transpose() * centered, basis.theta_perp.transpose() * centered};
}

Vector recompose(const Vector& x_r, const Vector& x_perp, const LisBasis& basis,
                 const GaussianPrior& prior) {
  require_dim("rank", basis.rank, x_r.size());
  require_dim("complement", basis.dim() - basis.rank, x_perp.size());
  return prior.mean() + basis.phi_r * x_r + basis.phi_perp * x_perp;
}

double reduced_log_posterior_lis(const Vector& x_r, const InverseProblem& problem,
                                 const LisBasis& basis) {
  require_dim("rank", basis.rank, x_r.size());
  const Vector x = problem.prior().mean() + basis.phi_r * x_r;
  return log_likelihood(x, problem) - 0.5 * x_r.squaredNorm();
}

Matrix sample_complement(Eigen::Index count, const LisBasis& basis, std::uint64_t seed) {
  if (count < 1) throw ConfigError("complement sample count must be >= 1");
  std::mt19937_64 rng(seed);
  return standard_normal(basis.dim() - basis.rank, count, rng);
}

}  // namespace lisret

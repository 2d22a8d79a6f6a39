#pragma once

// Chain diagnostics: autocorrelation, effective sample size, sample speed,
// marginal histograms on shared edges and the discrete Hellinger distance.

#include "lisret/linalg.hpp"

#include <iosfwd>
#include <vector>

namespace lisret {

struct Histogram {
  Vector edges;   // k + 1, strictly increasing
  Vector masses;  // k, nonnegative, sum 1
};

/// Biased (divide-by-N) autocorrelation rho_0..rho_max_lag, rho_0 = 1.
/// Throws NumericalError for a constant series.
Vector autocorr(const Vector& series, Eigen::Index max_lag);

/// N / (1 + 2 sum_{k=1}^{K*} rho_k), where K* is the first lag with
/// rho_k + rho_{k+1} < 0. Clamped to [1, N]; a nonpositive denominator
/// clamps to N.
double ess(const Vector& series);

double sample_speed(double n_eff, double wall_time_seconds);

struct EssReport {
  Vector n_eff;        // per coordinate
  Eigen::Index n_m = 0;
  double t_m = 0.0;
  Vector speed;        // per coordinate
  double min_n_eff = 0.0;
  double min_speed = 0.0;  // summary: worst-mixing coordinate
};

/// ESS of every column of `samples`; `t_m` is the chain wall time.
EssReport ess_report(const Matrix& samples, double t_m);

struct BinPolicy {
  int bins = 50;
  double lower_quantile = 0.001;
  double upper_quantile = 0.999;
};

/// Linear-interpolated empirical quantile (q in [0, 1]).
double quantile(Vector values, double q);

/// `bins` equal bins spanning the pooled [lower, upper] quantile range of
/// both series. A degenerate range is widened to +-0.5 around its value.
Vector shared_edges(const Vector& a, const Vector& b, const BinPolicy& policy = {});

/// Values outside the edges are counted in the first/last bin.
Histogram histogram(const Vector& series, const Vector& edges);

struct MarginalHistograms {
  std::vector<Histogram> a;
  std::vector<Histogram> b;
};

/// Per-coordinate histograms of two chains, each coordinate on edges shared
/// by both chains.
MarginalHistograms marginal_histograms(const Matrix& chain_a, const Matrix& chain_b,
                                       const BinPolicy& policy = {});

/// Per-coordinate histograms of a single chain on its own edges.
std::vector<Histogram> marginal_histograms(const Matrix& chain, const BinPolicy& policy = {});

/// (1/sqrt 2) sqrt(sum (sqrt p_i - sqrt q_i)^2); the histograms must share edges.
double hellinger(const Histogram& p, const Histogram& q);

struct HellingerReport {
  Vector per_coordinate;
  double mean = 0.0;
};

/// Mean over coordinates of marginal Hellinger distances on shared edges.
HellingerReport posterior_hellinger(const Matrix& chain_a, const Matrix& chain_b,
                                    const BinPolicy& policy = {});

/// Hellinger distance between two univariate normals.
double gaussian_hellinger_1d(double mean_a, double var_a, double mean_b, double var_b);

/// Hellinger distance between two multivariate normals (covariances SPD).
double gaussian_hellinger(const Vector& mean_a, const Matrix& cov_a, const Vector& mean_b,
                          const Matrix& cov_b);

/// Mean over coordinates of the univariate Hellinger distances between the
/// marginals of two (possibly degenerate) multivariate normals.
HellingerReport gaussian_marginal_hellinger(const Vector& mean_a, const Matrix& cov_a,
                                            const Vector& mean_b, const Matrix& cov_b);

/// n x 3 table per coordinate: mean, 2.5% and 97.5% quantiles.
Matrix posterior_envelope(const Matrix& samples);

}  // namespace lisret

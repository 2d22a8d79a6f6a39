#include "lisret/diagnostics.hpp"

#include "lisret/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace lisret {

Vector autocorr(const Vector& series, Eigen::Index max_lag) {
  const Eigen::Index n = series.size();
  if (n < 2) throw ConfigError("autocorrelation needs at least two values");
  if (max_lag < 0) throw ConfigError("max_lag must be >= 0");
  max_lag = std::min(max_lag, n - 1);

  const Vector centered = series.array() - series.mean();
  const double c0 = centered.squaredNorm();
  if (!(c0 > 0.0)) throw NumericalError("autocorrelation of a constant series is undefined");

  Eigen::Index size = 1;
  while (size < 2 * n) size <<= 1;
  std::vector<double> padded(static_cast<std::size_t>(size), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = centered(i);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::complex<double>(std::norm(c), 0.0);
  std::vector<double> acov;
  fft.inv(acov, spectrum);

  Vector rho(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k) rho(k) = acov[static_cast<std::size_t>(k)] / c0;
  rho(0) = 1.0;
  return rho;
}

double ess(const Vector& series) {
  const Eigen::Index n = series.size();
  const Vector rho = autocorr(series, n - 1);
  double sum = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    sum += rho(k);
    if (k + 1 < n && rho(k) + rho(k + 1) < 0.0) break;
  }
  const double nm = static_cast<double>(n);
  const double denominator = 1.0 + 2.0 * sum;
  if (!(denominator > 0.0)) return nm;
  return std::clamp(nm / denominator, 1.0, nm);
}

double sample_speed(double n_eff, double wall_time_seconds) {
  if (!(wall_time_seconds > 0.0)) throw ConfigError("sample speed needs a positive wall time");
  return n_eff / wall_time_seconds;
}

EssReport ess_report(const Matrix& samples, double t_m) {
  if (samples.rows() < 2 || samples.cols() < 1) throw ConfigError("chain too short for ESS");
  if (!(t_m > 0.0)) throw ConfigError("sample speed needs a positive wall time");
  EssReport r;
  r.n_m = samples.rows();
  r.t_m = t_m;
  r.n_eff.resize(samples.cols());
  for (Eigen::Index c = 0; c < samples.cols(); ++c) r.n_eff(c) = ess(samples.col(c));
  r.speed = r.n_eff / t_m;
  r.min_n_eff = r.n_eff.minCoeff();
  r.min_speed = sample_speed(r.min_n_eff, t_m);
  return r;
}

double quantile(Vector values, double q) {
  const Eigen::Index n = values.size();
  if (n == 0) throw ConfigError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level outside [0, 1]");
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const Eigen::Index hi = std::min(lo + 1, n - 1);
  double* data = values.data();
  std::nth_element(data, data + lo, data + n);
  const double lo_value = data[lo];
  const double hi_value = hi == lo ? lo_value : *std::min_element(data + lo + 1, data + n);
  return lo_value + (pos - static_cast<double>(lo)) * (hi_value - lo_value);
}

Vector shared_edges(const Vector& a, const Vector& b, const BinPolicy& policy) {
  if (policy.bins < 1) throw ConfigError("histogram needs at least one bin");
  if (a.size() + b.size() == 0) throw ConfigError("cannot bin an empty chain");
  Vector pooled(a.size() + b.size());
  pooled << a, b;
  double lo = quantile(pooled, policy.lower_quantile);
  double hi = quantile(pooled, policy.upper_quantile);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return Vector::LinSpaced(policy.bins + 1, lo, hi);
}

Histogram histogram(const Vector& series, const Vector& edges) {
  if (series.size() == 0) throw ConfigError("cannot bin an empty chain");
  const Eigen::Index k = edges.size() - 1;
  if (k < 1) throw ConfigError("histogram needs at least one bin");
  for (Eigen::Index i = 1; i <= k; ++i) {
    if (!(edges(i) > edges(i - 1))) throw ConfigError("histogram edges must increase");
  }
  Vector counts = Vector::Zero(k);
  const double lo = edges(0);
  const double width = (edges(k) - lo) / static_cast<double>(k);
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    const double v = series(i);
    auto bin = static_cast<Eigen::Index>(std::floor((v - lo) / width));
    bin = std::clamp<Eigen::Index>(bin, 0, k - 1);
    // Nonuniform or rounding-affected edges: settle on the containing bin.
    while (bin > 0 && v < edges(bin)) --bin;
    while (bin < k - 1 && v >= edges(bin + 1)) ++bin;
    counts(bin) += 1.0;
  }
  return {edges, counts / static_cast<double>(series.size())};
}

MarginalHistograms marginal_histograms(const Matrix& chain_a, const Matrix& chain_b,
                                       const BinPolicy& policy) {
  require_dim("state", chain_a.cols(), chain_b.cols());
  if (chain_a.rows() == 0 || chain_b.rows() == 0) throw ConfigError("cannot bin an empty chain");
  MarginalHistograms out;
  for (Eigen::Index c = 0; c < chain_a.cols(); ++c) {
    const Vector edges = shared_edges(chain_a.col(c), chain_b.col(c), policy);
    out.a.push_back(histogram(chain_a.col(c), edges));
    out.b.push_back(histogram(chain_b.col(c), edges));
  }
  return out;
}

std::vector<Histogram> marginal_histograms(const Matrix& chain, const BinPolicy& policy) {
  if (chain.rows() == 0) throw ConfigError("cannot bin an empty chain");
  std::vector<Histogram> out;
  for (Eigen::Index c = 0; c < chain.cols(); ++c) {
    out.push_back(histogram(chain.col(c), shared_edges(chain.col(c), Vector(), policy)));
  }
  return out;
}

double hellinger(const Histogram& p, const Histogram& q) {
  if (p.edges.size() != q.edges.size() || p.edges != q.edges) {
    throw ConfigError("Hellinger distance needs histograms on identical bin edges");
  }
  const double s = (p.masses.cwiseSqrt() - q.masses.cwiseSqrt()).squaredNorm();
  return std::min(1.0, std::sqrt(0.5 * s));
}

HellingerReport posterior_hellinger(const Matrix& chain_a, const Matrix& chain_b,
                                    const BinPolicy& policy) {
  const MarginalHistograms h = marginal_histograms(chain_a, chain_b, policy);
  HellingerReport r;
  r.per_coordinate.resize(chain_a.cols());
  for (std::size_t c = 0; c < h.a.size(); ++c) {
    r.per_coordinate(static_cast<Eigen::Index>(c)) = hellinger(h.a[c], h.b[c]);
  }
  r.mean = r.per_coordinate.mean();
  return r;
}

double gaussian_hellinger_1d(double mean_a, double var_a, double mean_b, double var_b) {
  const double sum = var_a + var_b;
  if (!(sum > 0.0)) return mean_a == mean_b ? 0.0 : 1.0;
  const double affinity = std::sqrt(2.0 * std::sqrt(var_a * var_b) / sum) *
                          std::exp(-0.25 * (mean_a - mean_b) * (mean_a - mean_b) / sum);
  return std::sqrt(std::max(0.0, 1.0 - affinity));
}

double gaussian_hellinger(const Vector& mean_a, const Matrix& cov_a, const Vector& mean_b,
                          const Matrix& cov_b) {
  require_dim("state", mean_a.size(), mean_b.size());
  const Matrix avg = 0.5 * (cov_a + cov_b);
  const Eigen::LLT<Matrix> la(cov_a);
  const Eigen::LLT<Matrix> lb(cov_b);
  const Eigen::LLT<Matrix> lm(avg);
  if (la.info() != Eigen::Success || lb.info() != Eigen::Success || lm.info() != Eigen::Success) {
    throw NumericalError("Gaussian Hellinger distance needs SPD covariances");
  }
  auto logdet = [](const Eigen::LLT<Matrix>& l) {
    return 2.0 * l.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  const Vector diff = mean_a - mean_b;
  const double log_affinity = 0.25 * logdet(la) + 0.25 * logdet(lb) - 0.5 * logdet(lm) -
                              0.125 * diff.dot(lm.solve(diff));
  return std::sqrt(std::max(0.0, 1.0 - std::exp(log_affinity)));
}

HellingerReport gaussian_marginal_hellinger(const Vector& mean_a, const Matrix& cov_a,
                                            const Vector& mean_b, const Matrix& cov_b) {
  require_dim("state", mean_a.size(), mean_b.size());
  HellingerReport r;
  r.per_coordinate.resize(mean_a.size());
  for (Eigen::Index i = 0; i < mean_a.size(); ++i) {
    r.per_coordinate(i) = gaussian_hellinger_1d(mean_a(i), std::max(0.0, cov_a(i, i)), mean_b(i),
                                                std::max(0.0, cov_b(i, i)));
  }
  r.mean = r.per_coordinate.mean();
  return r;
}

Matrix posterior_envelope(const Matrix& samples) {
  if (samples.rows() == 0) throw ConfigError("envelope of an empty chain");
  Matrix out(samples.cols(), 3);
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    out(c, 0) = samples.col(c).mean();
    out(c, 1) = quantile(samples.col(c), 0.025);
    out(c, 2) = quantile(samples.col(c), 0.975);
  }
  return out;
}

}  // namespace lisret

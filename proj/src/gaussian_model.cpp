#include "lisret/gaussian_model.hpp"

#include "lisret/errors.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lisret {

namespace {

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw NumericalError(std::string("non-finite ") + what);
}

bool parse_double(const std::string& token, double& value) {
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

}  // namespace

GaussianPrior::GaussianPrior(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  require_dim("state", mean_.size(), covariance_.rows());
  require_dim("state", mean_.size(), covariance_.cols());
  require_finite(mean_, "prior mean");
  chol_ = cholesky_lower(covariance_, "prior covariance");
}

Vector GaussianPrior::whiten(const Vector& x) const {
  require_dim("state", dim(), x.size());
  return chol_.triangularView<Eigen::Lower>().solve(x - mean_);
}

Vector GaussianPrior::color(const Vector& z) const {
  require_dim("state", dim(), z.size());
  return mean_ + chol_.triangularView<Eigen::Lower>() * z;
}

Matrix GaussianPrior::solve_upper(const Matrix& v) const {
  require_dim("state", dim(), v.rows());
  return chol_.transpose().triangularView<Eigen::Upper>().solve(v);
}

NoiseModel::NoiseModel(Matrix covariance) : covariance_(std::move(covariance)) {
  require_dim("data", covariance_.rows(), covariance_.cols());
  chol_ = cholesky_lower(covariance_, "noise covariance");
  const Matrix off = covariance_ - Matrix(covariance_.diagonal().asDiagonal());
  diagonal_ = off.cwiseAbs().maxCoeff() == 0.0;
  if (diagonal_) sqrt_diag_ = chol_.diagonal();
}

NoiseModel NoiseModel::isotropic(Eigen::Index m, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be positive");
  return NoiseModel(Matrix::Identity(m, m) * (sigma * sigma));
}

Matrix NoiseModel::whiten(const Matrix& r) const {
  require_dim("data", dim(), r.rows());
  if (diagonal_) return sqrt_diag_.cwiseInverse().asDiagonal() * r;
  return chol_.triangularView<Eigen::Lower>().solve(r);
}

InverseProblem::InverseProblem(std::shared_ptr<const ForwardOperator> forward,
                               GaussianPrior prior, NoiseModel noise, Vector data)
    : forward_(std::move(forward)),
      prior_(std::move(prior)),
      noise_(std::move(noise)),
      data_(std::move(data)) {
  if (!forward_) throw ConfigError("inverse problem needs a forward operator");
  require_dim("state", forward_->state_dim(), prior_.dim());
  require_dim("data", forward_->data_dim(), noise_.dim());
  require_dim("data", forward_->data_dim(), data_.size());
}

InverseProblem InverseProblem::with_data(Vector data) const {
  return InverseProblem(forward_, prior_, noise_, std::move(data));
}

double log_prior(const Vector& x, const GaussianPrior& prior) {
  require_finite(x, "state in log_prior");
  return -0.5 * prior.whiten(x).squaredNorm();
}

double misfit(const Vector& x, const InverseProblem& problem) {
  require_finite(x, "state in log_likelihood");
  const Vector predicted = problem.forward().evaluate(x);
  for (Eigen::Index j = 0; j < predicted.size(); ++j) {
    if (!std::isfinite(predicted(j))) throw NonFiniteOutputError(j);
  }
  const Vector residual = problem.data() - predicted;
  return 0.5 * problem.noise().whiten(residual).squaredNorm();
}

double log_likelihood(const Vector& x, const InverseProblem& problem) {
  return -misfit(x, problem);
}

double log_posterior(const Vector& x, const InverseProblem& problem) {
  return log_likelihood(x, problem) + log_prior(x, problem.prior());
}

Matrix whiten_jacobian(const Matrix& jacobian, const GaussianPrior& prior,
                       const NoiseModel& noise) {
  require_dim("data", noise.dim(), jacobian.rows());
  require_dim("state", prior.dim(), jacobian.cols());
  if (!prior.chol().diagonal().allFinite() || (prior.chol().diagonal().array() == 0.0).any() ||
      (noise.chol().diagonal().array() == 0.0).any()) {
    throw NumericalError("singular triangular factor in whitening");
  }
  return noise.whiten(jacobian) * prior.chol().triangularView<Eigen::Lower>();
}

GaussianPrior build_empirical_prior(const Matrix& ensemble, double jitter) {
  if (ensemble.rows() < 2) throw ConfigError("empirical prior needs at least two profiles");
  if (!ensemble.allFinite()) throw NumericalError("ensemble contains non-finite values");
  if (!(jitter >= 0.0)) throw ConfigError("jitter must be nonnegative");
  const Vector mean = ensemble.colwise().mean().transpose();
  const Matrix centered = ensemble.rowwise() - mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(ensemble.rows() - 1);
  cov = 0.5 * (cov + cov.transpose());

  double mean_diag = cov.diagonal().mean();
  // A fully degenerate ensemble has no scale of its own; jitter the unit matrix.
  if (!(mean_diag > 0.0)) mean_diag = 1.0;
  cov.diagonal().array() += jitter * mean_diag;
  try {
    return GaussianPrior(mean, cov);
  } catch (const NumericalError&) {
    std::ostringstream msg;
    msg << "empirical prior covariance is not positive definite with jitter " << jitter
        << "; increase the jitter";
    throw NumericalError(msg.str());
  }
}

Ensemble read_ensemble(std::istream& in) {
  std::vector<std::vector<double>> rows;
  Ensemble out;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    double value = 0.0;
    if (first_data_line && !parse_double(tokens.front(), value)) {
      std::vector<double> altitudes;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (!parse_double(tokens[i], value)) {
          throw IoError("malformed altitude header at line " + std::to_string(line_no));
        }
        altitudes.push_back(value);
      }
      out.altitudes = Eigen::Map<const Vector>(altitudes.data(),
                                               static_cast<Eigen::Index>(altitudes.size()));
      first_data_line = false;
      continue;
    }
    first_data_line = false;
    std::vector<double> row;
    for (const auto& t : tokens) {
      if (!parse_double(t, value)) {
        throw IoError("malformed ensemble value '" + t + "' at line " + std::to_string(line_no));
      }
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ensemble row at line " + std::to_string(line_no) + " has " +
                    std::to_string(row.size()) + " values, expected " +
                    std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("ensemble file has no profiles");
  const auto n = static_cast<Eigen::Index>(rows.front().size());
  if (out.altitudes.size() != 0) require_dim("layer", n, out.altitudes.size());
  out.profiles.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.profiles.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), n);
  }
  return out;
}

void write_ensemble(std::ostream& out, const Matrix& profiles, const Vector& altitudes) {
  out << std::setprecision(17);
  if (altitudes.size() > 0) {
    require_dim("layer", profiles.cols(), altitudes.size());
    out << "altitude";
    for (Eigen::Index l = 0; l < altitudes.size(); ++l) out << ' ' << altitudes(l);
    out << '\n';
  }
  for (Eigen::Index i = 0; i < profiles.rows(); ++i) {
    for (Eigen::Index l = 0; l < profiles.cols(); ++l) {
      if (l > 0) out << ' ';
      out << profiles(i, l);
    }
    out << '\n';
  }
}

void write_prior(std::ostream& out, const GaussianPrior& prior) {
  const Eigen::Index n = prior.dim();
  out << "layer,mean";
  for (Eigen::Index l = 0; l < n; ++l) out << ",cov_" << l;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < n; ++i) {
    out << i << ',' << prior.mean()(i);
    for (Eigen::Index l = 0; l < n; ++l) out << ',' << prior.covariance()(i, l);
    out << '\n';
  }
}

}  // namespace lisret

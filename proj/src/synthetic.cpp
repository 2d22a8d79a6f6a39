#include "lisret/synthetic.hpp"

#include "lisret/errors.hpp"
#include "lisret/lis.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace lisret {

namespace {

struct Line {
  double center;
  double strength;
};

std::vector<Line> draw_lines(int count, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> where(lo, hi);
  std::uniform_real_distribution<double> how_strong(0.3, 1.0);
  std::vector<Line> lines;
  for (int i = 0; i < count; ++i) {
    const double c = where(rng);
    lines.push_back({c, how_strong(rng)});
  }
  return lines;
}

// Lorentz line shape, unit area.
double lorentz(double offset, double hwhm) {
  return hwhm / (std::numbers::pi * (offset * offset + hwhm * hwhm));
}

Matrix line_table(const std::vector<Line>& lines, const Vector& wavelengths, const Vector& z,
                  const SyntheticConfig& c) {
  Matrix table = Matrix::Zero(wavelengths.size(), z.size());
  for (Eigen::Index l = 0; l < z.size(); ++l) {
    const double pressure = std::exp(-z(l) / c.pressure_scale_height_km);
    const double width = c.width_floor_nm + (c.width_surface_nm - c.width_floor_nm) * pressure;
    const double decay = std::exp(-z(l) / c.strength_scale_height_km);
    for (const Line& line : lines) {
      for (Eigen::Index j = 0; j < wavelengths.size(); ++j) {
        table(j, l) += line.strength * decay * lorentz(wavelengths(j) - line.center, width);
      }
    }
  }
  return table;
}

Matrix correlation(const Vector& z, double length) {
  const Eigen::Index n = z.size();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = (z(i) - z(j)) / length;
      k(i, j) = std::exp(-0.5 * d * d);
    }
  }
  return k;
}

void validate(const SyntheticConfig& c) {
  if (c.lines < 1) throw ConfigError("synthetic setup needs at least one absorption line");
  if (c.background_lines < 0) throw ConfigError("background line count must be >= 0");
  if (c.wavelengths < 1) throw ConfigError("synthetic setup needs at least one wavelength");
  if (c.layers < 1) throw ConfigError("synthetic setup needs at least one layer");
  if (!(c.wavelength_max_nm > c.wavelength_min_nm)) {
    throw ConfigError("wavelength range must be increasing");
  }
  if (!(c.width_surface_nm > 0.0) || !(c.width_floor_nm > 0.0)) {
    throw ConfigError("line widths must be positive");
  }
  if (!(c.peak_optical_depth > 0.0)) throw ConfigError("peak optical depth must be positive");
  if (c.min_dof > c.max_dof) throw ConfigError("min_dof exceeds max_dof");
  if (c.ensemble.count < 2) throw ConfigError("ensemble needs at least two profiles");
}

}  // namespace

Matrix generate_ensemble(const AtmosphericGrid& grid, const EnsembleConfig& c) {
  if (c.count < 2) throw ConfigError("ensemble needs at least two profiles");
  const Vector z = grid.midpoints();
  const Eigen::Index n = z.size();

  Vector mean(n);
  Vector sd(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    mean(l) = c.surface_density * std::exp(-z(l) / c.density_scale_height_km);
    const double s = 1.0 / (1.0 + std::exp(-(z(l) - c.transition_km) / c.transition_width_km));
    sd(l) = mean(l) * (c.relative_sd_low + (c.relative_sd_high - c.relative_sd_low) * s);
  }
  Matrix corr = (1.0 - c.narrow_weight) * correlation(z, c.broad_length_km) +
                c.narrow_weight * correlation(z, c.narrow_length_km);
  corr.diagonal().array() += 1e-10;
  const Matrix factor = sd.asDiagonal() * cholesky_lower(corr, "ensemble correlation");

  std::mt19937_64 rng(c.seed);
  const Matrix draws = standard_normal(n, c.count, rng);
  Matrix profiles = (factor * draws).transpose();
  profiles.rowwise() += mean.transpose();
  return profiles;
}

GaussianPrior default_prior(const AtmosphericGrid& grid, const SyntheticConfig& config) {
  return build_empirical_prior(generate_ensemble(grid, config.ensemble), config.jitter);
}

NoiseModel default_noise(const BeerLambertModel& model, const SyntheticConfig& config) {
  return NoiseModel::isotropic(model.data_dim(),
                               config.noise_relative_sigma * model.continuum().maxCoeff());
}

SyntheticSetup synth_setup(const SyntheticConfig& config) {
  validate(config);
  AtmosphericGrid grid = AtmosphericGrid::uniform(0.0, config.top_km, config.layers);
  const Vector z = grid.midpoints();
  const Vector dz = grid.thicknesses();

  SpectralSetup setup;
  setup.wavelengths =
      Vector::LinSpaced(config.wavelengths, config.wavelength_min_nm, config.wavelength_max_nm);
  const double span = config.wavelength_max_nm - config.wavelength_min_nm;
  setup.solar_intensity.resize(config.wavelengths);
  for (Eigen::Index j = 0; j < config.wavelengths; ++j) {
    const double phase = (setup.wavelengths(j) - config.wavelength_min_nm) / span;
    setup.solar_intensity(j) = 1.0 + 0.05 * std::cos(2.0 * std::numbers::pi * phase);
  }
  setup.instrument = config.instrument;

  std::mt19937_64 rng(config.seed);
  const double margin = 0.05 * span;
  const auto lines = draw_lines(config.lines, config.wavelength_min_nm + margin,
                                config.wavelength_max_nm - margin, rng);
  Matrix retrieved = line_table(lines, setup.wavelengths, z, config);

  const GaussianPrior prior = default_prior(grid, config);
  const Vector x0 = prior.mean();
  // Normalize so the strongest line reaches the requested depth at x0.
  const double depth = (retrieved * dz.cwiseProduct(x0)).maxCoeff();
  if (!(depth > 0.0)) throw ConfigError("synthetic cross sections produce no absorption");
  retrieved *= config.peak_optical_depth / depth;

  setup.cross_sections.push_back(retrieved);
  if (config.background_lines > 0) {
    const auto bg_lines = draw_lines(config.background_lines, config.wavelength_min_nm,
                                     config.wavelength_max_nm, rng);
    Matrix bg = line_table(bg_lines, setup.wavelengths, z, config);
    Vector profile(z.size());
    for (Eigen::Index l = 0; l < z.size(); ++l) {
      profile(l) = std::exp(-z(l) / config.background_scale_height_km);
    }
    const double bg_depth = (bg * dz.cwiseProduct(profile)).maxCoeff();
    if (bg_depth > 0.0) bg *= config.background_optical_depth / bg_depth;
    setup.cross_sections.push_back(bg);
    setup.background_profiles.push_back(profile);
  }

  SyntheticSetup out{setup, grid};
  for (int attempt = 0; attempt <= config.max_adjustments; ++attempt) {
    SpectralSetup scaled = setup;
    scaled.cross_sections[0] *= out.strength_scale;
    const BeerLambertModel model(scaled, grid);
    const NoiseModel noise = default_noise(model, config);
    const Matrix jt = whiten_jacobian(model.jacobian(x0), prior, noise);
    out.dof = dof_signal(jt, 1.0);
    if (out.dof >= config.min_dof && out.dof <= config.max_dof) {
      out.setup = std::move(scaled);
      out.adjustments = attempt;
      return out;
    }
    out.strength_scale *= out.dof > config.max_dof ? 0.5 : 2.0;
  }
  throw ConfigError("synthetic setup cannot reach " + std::to_string(config.min_dof) + "-" +
                    std::to_string(config.max_dof) + " informative directions within " +
                    std::to_string(config.max_adjustments) + " strength adjustments (last: " +
                    std::to_string(out.dof) + ")");
}

}  // namespace lisret

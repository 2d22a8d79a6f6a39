#pragma once

// Self-contained synthetic retrieval problems: Lorentzian cross-section
// tables standing in for line databases, and a smooth correlated profile
// ensemble standing in for a measured prior ensemble.

#include "lisret/forward_model.hpp"
#include "lisret/gaussian_model.hpp"

#include <cstdint>

namespace lisret {

/// Smooth profiles x = mean(z) + sd(z) * (correlated field). The mean decays
/// with a density scale height; the relative spread widens above a
/// transition altitude. The field mixes a broad and a narrow
/// squared-exponential correlation so the covariance spectrum decays
/// gradually.
struct EnsembleConfig {
  Eigen::Index count = 100;
  double surface_density = 1.0;
  double density_scale_height_km = 8.0;
  double relative_sd_low = 0.04;
  double relative_sd_high = 0.20;
  double transition_km = 15.0;
  double transition_width_km = 3.0;
  double broad_length_km = 6.0;
  double narrow_length_km = 1.5;
  double narrow_weight = 0.3;
  std::uint64_t seed = 7;
};

struct SyntheticConfig {
  Eigen::Index wavelengths = 200;  // m
  Eigen::Index layers = 50;        // n
  double top_km = 50.0;
  double wavelength_min_nm = 1642.0;
  double wavelength_max_nm = 1648.0;

  int lines = 10;
  double width_surface_nm = 0.12;   // Lorentz HWHM at the ground
  double width_floor_nm = 0.015;    // HWHM floor aloft
  double pressure_scale_height_km = 7.0;
  double strength_scale_height_km = 20.0;
  double peak_optical_depth = 1.0;  // at the prior mean, before adjustment

  int background_lines = 4;
  double background_optical_depth = 0.3;
  double background_scale_height_km = 2.0;

  InstrumentPolynomial instrument;
  double noise_relative_sigma = 1e-3;  // of the peak continuum
  double jitter = 1e-6;
  EnsembleConfig ensemble;

  Eigen::Index min_dof = 2;
  Eigen::Index max_dof = 6;
  int max_adjustments = 10;
  std::uint64_t seed = 1;
};

struct SyntheticSetup {
  SpectralSetup setup;
  AtmosphericGrid grid;
  double strength_scale = 1.0;  // multiplier applied by the adjustment loop
  int adjustments = 0;
  Eigen::Index dof = 0;         // whitened singular values >= 1 at the prior mean
};

/// Profile ensemble on `grid`, one profile per row.
Matrix generate_ensemble(const AtmosphericGrid& grid, const EnsembleConfig& config);

/// Prior from the generated ensemble with the configured jitter.
GaussianPrior default_prior(const AtmosphericGrid& grid, const SyntheticConfig& config);

/// sigma = noise_relative_sigma * max(continuum)
NoiseModel default_noise(const BeerLambertModel& model, const SyntheticConfig& config);

/// Builds the setup and checks that the whitened Jacobian at the prior mean
/// has between min_dof and max_dof singular values >= 1 under the default
/// prior and noise, rescaling line strengths (halving or doubling) up to
/// `max_adjustments` times. Throws ConfigError when that fails or the
/// config is degenerate. Deterministic for a fixed config.
SyntheticSetup synth_setup(const SyntheticConfig& config);

}  // namespace lisret

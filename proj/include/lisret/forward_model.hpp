#pragma once

// Beer-Lambert absorption forward model on a layered atmosphere.
//
//   I(l_j) = I0(l_j) * exp(-sum_k sum_layers C_k(l_j, layer) rho_k(layer) dz(layer))
//            * (a l_j^2 + b l_j + c) + d
//
// Gas 0 of the setup is the retrieved gas; gases 1..K-1 are held at their
// background profiles. Scattering is not modelled.

#include "lisret/linalg.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace lisret {

class AtmosphericGrid {
public:
  /// `boundaries` in km, strictly increasing, finite, lowest >= 0, at least two.
  explicit AtmosphericGrid(Vector boundaries);

  /// `layers` equal layers spanning [bottom, top].
  static AtmosphericGrid uniform(double bottom_km, double top_km, Eigen::Index layers);

  Eigen::Index layer_count() const { return boundaries_.size() - 1; }
  const Vector& boundaries() const { return boundaries_; }
  Vector thicknesses() const;
  Vector midpoints() const;

private:
  Vector boundaries_;
};

struct AtmosphericState {
  Vector densities;
};

struct Spectrum {
  Vector intensities;
};

struct InstrumentPolynomial {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double offset = 0.0;  // d

  double baseline(double wavelength) const { return (a * wavelength + b) * wavelength + c; }
};

struct SpectralSetup {
  Vector wavelengths;                        // m, nm
  Vector solar_intensity;                    // m, > 0
  std::vector<Matrix> cross_sections;        // K tables, each m x n; [0] is retrieved
  std::vector<Vector> background_profiles;   // K-1 profiles, each n
  InstrumentPolynomial instrument;

  Eigen::Index wavelength_count() const { return wavelengths.size(); }
  Eigen::Index gas_count() const { return static_cast<Eigen::Index>(cross_sections.size()); }

  /// Throws DimensionError naming the first inconsistent axis, or ConfigError
  /// for value-range violations.
  void validate(const AtmosphericGrid& grid) const;
};

/// A differentiable map from state space (n) to data space (m). Implementations
/// are immutable; `evaluate` and `jacobian` are safe to call concurrently.
class ForwardOperator {
public:
  virtual ~ForwardOperator() = default;

  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index data_dim() const = 0;
  virtual Vector evaluate(const Vector& x) const = 0;
  virtual Matrix jacobian(const Vector& x) const = 0;
};

class BeerLambertModel final : public ForwardOperator {
public:
  BeerLambertModel(SpectralSetup setup, AtmosphericGrid grid);

  Eigen::Index state_dim() const override { return grid_.layer_count(); }
  Eigen::Index data_dim() const override { return setup_.wavelength_count(); }
  Vector evaluate(const Vector& x) const override;
  Matrix jacobian(const Vector& x) const override;

  const SpectralSetup& setup() const { return setup_; }
  const AtmosphericGrid& grid() const { return grid_; }

  /// Continuum without absorption, I0 * baseline + d.
  Vector continuum() const;

private:
  /// I0 * exp(-tau) * baseline, i.e. the spectrum before the offset.
  Vector attenuated(const Vector& x) const;

  SpectralSetup setup_;
  AtmosphericGrid grid_;
  Matrix retrieved_depth_;     // C_0 scaled by layer thickness, m x n
  Vector background_depth_;    // optical depth of the fixed gases, m
  Vector scale_;               // I0 * baseline, m
};

/// F(x) = G x + offset. Used for linear-Gaussian testbeds.
class LinearModel final : public ForwardOperator {
public:
  LinearModel(Matrix operator_matrix, Vector offset);

  Eigen::Index state_dim() const override { return g_.cols(); }
  Eigen::Index data_dim() const override { return g_.rows(); }
  Vector evaluate(const Vector& x) const override;
  Matrix jacobian(const Vector& x) const override;

  const Matrix& operator_matrix() const { return g_; }
  const Vector& offset() const { return offset_; }

private:
  Matrix g_;
  Vector offset_;
};

Spectrum simulate_spectrum(const AtmosphericState& state, const SpectralSetup& setup,
                           const AtmosphericGrid& grid);

Matrix jacobian(const AtmosphericState& state, const SpectralSetup& setup,
                const AtmosphericGrid& grid);

/// Columnar text: one "wavelength layer_index value" row per table entry.
void write_cross_sections(std::ostream& out, const SpectralSetup& setup, Eigen::Index gas = 0);

/// Reads the format produced by `write_cross_sections`; the table shape is
/// (distinct wavelengths) x (max layer index + 1), rows in order of first
/// appearance.
struct CrossSectionTable {
  Vector wavelengths;
  Matrix values;
};
CrossSectionTable read_cross_sections(std::istream& in);

}  // namespace lisret

#include "lisret/forward_model.hpp"

#include "lisret/errors.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace lisret {

AtmosphericGrid::AtmosphericGrid(Vector boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) {
    throw ConfigError("atmospheric grid needs at least two layer boundaries");
  }
  if (!boundaries_.allFinite()) throw ConfigError("layer boundaries must be finite");
  if (boundaries_(0) < 0.0) throw ConfigError("lowest layer boundary must be >= 0");
  for (Eigen::Index i = 1; i < boundaries_.size(); ++i) {
    if (!(boundaries_(i) > boundaries_(i - 1))) {
      throw ConfigError("layer boundaries must be strictly increasing (index " +
                        std::to_string(i) + ")");
    }
  }
}

AtmosphericGrid AtmosphericGrid::uniform(double bottom_km, double top_km, Eigen::Index layers) {
  if (layers < 1) throw ConfigError("layer count must be >= 1");
  return AtmosphericGrid(Vector::LinSpaced(layers + 1, bottom_km, top_km));
}

Vector AtmosphericGrid::thicknesses() const {
  const Eigen::Index n = layer_count();
  return boundaries_.tail(n) - boundaries_.head(n);
}

Vector AtmosphericGrid::midpoints() const {
  const Eigen::Index n = layer_count();
  return 0.5 * (boundaries_.tail(n) + boundaries_.head(n));
}

void SpectralSetup::validate(const AtmosphericGrid& grid) const {
  const Eigen::Index m = wavelengths.size();
  const Eigen::Index n = grid.layer_count();
  if (m < 1) throw ConfigError("spectral setup has no wavelengths");
  require_dim("wavelength", m, solar_intensity.size());
  if (cross_sections.empty()) throw ConfigError("spectral setup has no gases");
  require_dim("gas", gas_count() - 1, static_cast<long>(background_profiles.size()));
  for (const auto& table : cross_sections) {
    require_dim("wavelength", m, table.rows());
    require_dim("layer", n, table.cols());
    if (!table.allFinite() || (table.array() < 0.0).any()) {
      throw ConfigError("cross sections must be finite and nonnegative");
    }
  }
  for (const auto& profile : background_profiles) {
    require_dim("layer", n, profile.size());
    if (!profile.allFinite()) throw ConfigError("background profiles must be finite");
  }
  if (!wavelengths.allFinite()) throw ConfigError("wavelengths must be finite");
  if (!solar_intensity.allFinite() || (solar_intensity.array() <= 0.0).any()) {
    throw ConfigError("solar intensity must be finite and strictly positive");
  }
}

BeerLambertModel::BeerLambertModel(SpectralSetup setup, AtmosphericGrid grid)
    : setup_(std::move(setup)), grid_(std::move(grid)) {
  setup_.validate(grid_);
  const Vector dz = grid_.thicknesses();
  const Eigen::Index m = setup_.wavelength_count();

  retrieved_depth_ = setup_.cross_sections[0] * dz.asDiagonal();
  background_depth_ = Vector::Zero(m);
  for (Eigen::Index k = 1; k < setup_.gas_count(); ++k) {
    background_depth_ += setup_.cross_sections[static_cast<std::size_t>(k)] *
                         dz.cwiseProduct(setup_.background_profiles[static_cast<std::size_t>(k - 1)]);
  }
  scale_.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    scale_(j) = setup_.solar_intensity(j) * setup_.instrument.baseline(setup_.wavelengths(j));
  }
}

Vector BeerLambertModel::attenuated(const Vector& x) const {
  require_dim("layer", state_dim(), x.size());
  const Vector depth = retrieved_depth_ * x + background_depth_;
  return scale_.cwiseProduct((-depth).array().exp().matrix());
}

Vector BeerLambertModel::evaluate(const Vector& x) const {
  Vector out = attenuated(x).array() + setup_.instrument.offset;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (!std::isfinite(out(j))) throw NonFiniteOutputError(j);
  }
  return out;
}

Matrix BeerLambertModel::jacobian(const Vector& x) const {
  // dI_j/dx_l = -C_0(j, l) dz_l * I0_j exp(-tau_j) baseline_j
  const Vector factor = attenuated(x);
  return -(factor.asDiagonal() * retrieved_depth_);
}

Vector BeerLambertModel::continuum() const { return scale_.array() + setup_.instrument.offset; }

LinearModel::LinearModel(Matrix operator_matrix, Vector offset)
    : g_(std::move(operator_matrix)), offset_(std::move(offset)) {
  require_dim("data", g_.rows(), offset_.size());
}

Vector LinearModel::evaluate(const Vector& x) const {
  require_dim("state", g_.cols(), x.size());
  return g_ * x + offset_;
}

Matrix LinearModel::jacobian(const Vector& x) const {
  require_dim("state", g_.cols(), x.size());
  return g_;
}

Spectrum simulate_spectrum(const AtmosphericState& state, const SpectralSetup& setup,
                           const AtmosphericGrid& grid) {
  return {BeerLambertModel(setup, grid).evaluate(state.densities)};
}

Matrix jacobian(const AtmosphericState& state, const SpectralSetup& setup,
                const AtmosphericGrid& grid) {
  return BeerLambertModel(setup, grid).jacobian(state.densities);
}

void write_cross_sections(std::ostream& out, const SpectralSetup& setup, Eigen::Index gas) {
  if (gas < 0 || gas >= setup.gas_count()) {
    throw ConfigError("gas index " + std::to_string(gas) + " out of range");
  }
  const Matrix& table = setup.cross_sections[static_cast<std::size_t>(gas)];
  out << "# wavelength layer value\n" << std::setprecision(17);
  for (Eigen::Index j = 0; j < table.rows(); ++j) {
    for (Eigen::Index l = 0; l < table.cols(); ++l) {
      out << setup.wavelengths(j) << ' ' << l << ' ' << table(j, l) << '\n';
    }
  }
}

CrossSectionTable read_cross_sections(std::istream& in) {
  struct Entry {
    std::size_t row;
    long layer;
    double value;
  };
  std::vector<double> wavelengths;
  std::map<double, std::size_t> row_of;
  std::vector<Entry> entries;
  long max_layer = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    double wl = 0.0;
    long layer = 0;
    double value = 0.0;
    if (!(fields >> wl >> layer >> value) || layer < 0) {
      throw IoError("malformed cross-section row at line " + std::to_string(line_no));
    }
    auto [it, inserted] = row_of.try_emplace(wl, wavelengths.size());
    if (inserted) wavelengths.push_back(wl);
    entries.push_back({it->second, layer, value});
    max_layer = std::max(max_layer, layer);
  }
  if (entries.empty()) throw IoError("cross-section file has no data rows");

  CrossSectionTable table;
  table.wavelengths = Eigen::Map<const Vector>(wavelengths.data(),
                                               static_cast<Eigen::Index>(wavelengths.size()));
  table.values = Matrix::Zero(table.wavelengths.size(), max_layer + 1);
  for (const auto& e : entries) table.values(static_cast<Eigen::Index>(e.row), e.layer) = e.value;
  return table;
}

}  // namespace lisret

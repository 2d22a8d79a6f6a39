#include "fixtures.hpp"

#include "lisret/errors.hpp"
#include "lisret/forward_model.hpp"
#include "lisret/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace lisret;

namespace {

SpectralSetup one_term_setup() {
  SpectralSetup s;
  s.wavelengths = Vector::Constant(1, 1000.0);
  s.solar_intensity = Vector::Constant(1, 1.0);
  s.cross_sections = {Matrix::Constant(1, 1, 0.5)};
  return s;
}

double max_fd_error(const BeerLambertModel& model, const Vector& x) {
  const Matrix j = model.jacobian(x);
  Matrix fd(j.rows(), j.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * (1.0 + std::abs(x(k)));
    Vector xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    fd.col(k) = (model.evaluate(xp) - model.evaluate(xm)) / (2.0 * h);
  }
  return (j - fd).cwiseAbs().maxCoeff() / j.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(AtmosphericGrid(Vector::Constant(1, 0.0)), ConfigError);
  Vector decreasing(3);
  decreasing << 0.0, 2.0, 1.0;
  CHECK_THROWS_AS(AtmosphericGrid{decreasing}, ConfigError);
  Vector negative(2);
  negative << -1.0, 1.0;
  CHECK_THROWS_AS(AtmosphericGrid{negative}, ConfigError);
  const auto grid = AtmosphericGrid::uniform(0.0, 10.0, 5);
  CHECK(grid.layer_count() == 5);
  CHECK(grid.thicknesses().isApproxToConstant(2.0));
  CHECK(grid.midpoints()(0) == doctest::Approx(1.0));
}

TEST_CASE("zero densities pass the continuum through") {
  std::mt19937_64 rng(3);
  auto [setup, grid] = testing::random_spectral(7, 4, rng);
  setup.cross_sections.resize(1);
  setup.background_profiles.clear();
  setup.instrument = {};
  const AtmosphericState zero{Vector::Zero(4)};
  CHECK((simulate_spectrum(zero, setup, grid).intensities - setup.solar_intensity).norm() == 0.0);

  setup.instrument.offset = 5.0;
  const Vector shifted = simulate_spectrum(zero, setup, grid).intensities;
  CHECK((shifted - (setup.solar_intensity.array() + 5.0).matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("single layer hand evaluation") {
  const SpectralSetup s = one_term_setup();
  const AtmosphericGrid grid = AtmosphericGrid::uniform(0.0, 1.0, 1);
  const AtmosphericState state{Vector::Constant(1, 2.0)};
  CHECK(simulate_spectrum(state, s, grid).intensities(0) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(jacobian(state, s, grid)(0, 0) == doctest::Approx(-0.183940).epsilon(1e-6));
}

TEST_CASE("no sensitivity without retrieved-gas cross-sections") {
  std::mt19937_64 rng(4);
  auto [setup, grid] = testing::random_spectral(6, 3, rng);
  setup.cross_sections[0].setZero();
  const AtmosphericState state{Vector::Constant(3, 1.0)};
  CHECK(jacobian(state, setup, grid).isZero(0.0));
}

TEST_CASE("analytic Jacobian matches central differences") {
  std::mt19937_64 rng(5);
  auto [setup, grid] = testing::random_spectral(30, 8, rng);
  const BeerLambertModel model(setup, grid);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = (Vector::Ones(8) + 0.3 * standard_normal(8, 1, rng)).eval();
    CHECK(max_fd_error(model, x) < 1e-6);
  }
}

TEST_CASE("more absorber never brightens the spectrum") {
  std::mt19937_64 rng(6);
  auto [setup, grid] = testing::random_spectral(20, 5, rng);
  setup.instrument.offset = 0.0;
  const BeerLambertModel model(setup, grid);
  Vector x = Vector::Ones(5);
  const Vector base = model.evaluate(x);
  x(2) += 0.5;
  CHECK(((model.evaluate(x) - base).array() <= 0.0).all());
}

TEST_CASE("optical depth scales with layer thickness") {
  const SpectralSetup s = one_term_setup();
  const AtmosphericState state{Vector::Constant(1, 2.0)};
  const double thin = simulate_spectrum(state, s, AtmosphericGrid::uniform(0.0, 1.0, 1)).intensities(0);
  const double thick = simulate_spectrum(state, s, AtmosphericGrid::uniform(0.0, 2.0, 1)).intensities(0);
  CHECK(thick == doctest::Approx(thin * thin));
}

TEST_CASE("setup validation names the inconsistent axis") {
  std::mt19937_64 rng(7);
  auto [setup, grid] = testing::random_spectral(6, 3, rng);
  auto bad_wavelength = setup;
  bad_wavelength.solar_intensity = Vector::Ones(5);
  try {
    bad_wavelength.validate(grid);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.axis() == "wavelength");
  }
  auto bad_layer = setup;
  bad_layer.cross_sections[1] = Matrix::Zero(6, 4);
  try {
    bad_layer.validate(grid);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.axis() == "layer");
  }
  auto negative = setup;
  negative.cross_sections[0](0, 0) = -1.0;
  CHECK_THROWS_AS(negative.validate(grid), ConfigError);
  auto dark = setup;
  dark.solar_intensity(0) = 0.0;
  CHECK_THROWS_AS(dark.validate(grid), ConfigError);
  CHECK_THROWS_AS(BeerLambertModel(bad_wavelength, grid), DimensionError);
}

TEST_CASE("cross-section text round trip") {
  std::mt19937_64 rng(8);
  auto [setup, grid] = testing::random_spectral(5, 3, rng);
  std::stringstream buf;
  write_cross_sections(buf, setup, 0);
  const CrossSectionTable table = read_cross_sections(buf);
  CHECK(table.values == setup.cross_sections[0]);
  CHECK(table.wavelengths == setup.wavelengths);
}

TEST_CASE("linear model") {
  Matrix g(2, 2);
  g << 1, 2, 3, 4;
  const LinearModel model(g, Vector::Ones(2));
  CHECK(model.evaluate(Vector::Ones(2)) == Eigen::Vector2d(4, 8));
  CHECK(model.jacobian(Vector::Zero(2)) == g);
}

TEST_CASE("synthetic setup") {
  SyntheticConfig config;
  const SyntheticSetup a = synth_setup(config);
  CHECK(a.dof >= 2);
  CHECK(a.dof <= 6);
  CHECK(a.setup.wavelength_count() == 200);
  CHECK(a.grid.layer_count() == 50);

  const SyntheticSetup b = synth_setup(config);
  CHECK(a.setup.cross_sections[0] == b.setup.cross_sections[0]);
  CHECK(a.setup.cross_sections[1] == b.setup.cross_sections[1]);
  CHECK(a.strength_scale == b.strength_scale);

  config.lines = 0;
  CHECK_THROWS_AS(synth_setup(config), ConfigError);

  SUBCASE("gradient check on the synthetic problem") {
    const BeerLambertModel model(a.setup, a.grid);
    const GaussianPrior prior = default_prior(a.grid, SyntheticConfig{});
    CHECK(max_fd_error(model, prior.mean()) < 1e-6);
  }
}

TEST_CASE("doubled thickness with halved densities leaves the spectrum unchanged") {
  std::mt19937_64 rng(9);
  auto [setup, grid] = testing::random_spectral(12, 4, rng);
  const Vector x = Vector::Ones(4) + 0.2 * standard_normal(4, 1, rng);
  const AtmosphericGrid doubled(2.0 * grid.boundaries());
  setup.background_profiles[0] *= 0.5;
  auto halved = setup;
  setup.background_profiles[0] *= 2.0;
  const Vector a = simulate_spectrum(AtmosphericState{x}, setup, grid).intensities;
  const Vector b = simulate_spectrum(AtmosphericState{0.5 * x}, halved, doubled).intensities;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14 * a.cwiseAbs().maxCoeff());
}

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "vpfp/pnp.hpp"

namespace {

using namespace vpfp;

PnpModel charged_model(std::size_t nx, DiffusivityMode mode = DiffusivityMode::kappa_over_zeta) {
  PnpModel m;
  m.nx = nx;
  m.species.resize(2);
  m.species[0].valence = 1;
  m.species[0].kappa = 2.0;
  m.species[1].valence = -1;
  m.species[1].kappa = 0.5;
  m.species[1].zeta = 2.0;
  m.background.assign(nx, 0.0);
  m.mode = mode;
  return m;
}

std::vector<std::vector<double>> cosine_pair(std::size_t nx, double amp) {
  std::vector<std::vector<double>> n(2, std::vector<double>(nx));
  for (std::size_t j = 0; j < nx; ++j) {
    const double c = std::cos(std::numbers::pi * (j + 0.5) / nx);
    n[0][j] = 1.0 + amp * c;
    n[1][j] = 1.0 - amp * c;
  }
  return n;
}

TEST(ScharfetterGummel, ReducesToFickWithoutPotential) {
  EXPECT_DOUBLE_EQ(sg_flux(2.0, 0.5, 0.3, 0.3, 1, 0.7, 0.1), 0.7 / 0.1 * 1.5);
  EXPECT_EQ(sg_flux(1.3, 1.3, 0.0, 0.0, -1, 1.0, 0.1), 0.0);
}

TEST(ScharfetterGummel, VanishesOnBoltzmannProfiles) {
  for (int z : {-2, -1, 1, 3}) {
    for (double dphi : {-3.0, -0.2, 1e-12, 0.5, 4.0}) {
      const double nl = 1.7;
      const double nr = nl * std::exp(-z * dphi);
      EXPECT_NEAR(sg_flux(nl, nr, 0.1, 0.1 + dphi, z, 1.0, 0.05), 0.0, 1e-11 * (nl + nr) / 0.05);
    }
  }
}

// For large potential drops SG becomes the upwind drift flux -c z dphi/dx n_upwind.
TEST(ScharfetterGummel, DriftLimitIsUpwind) {
  const double dx = 0.01, c = 1.0;
  const double dphi = 60.0;
  const double j = sg_flux(0.4, 0.9, 0.0, dphi, 1, c, dx);
  EXPECT_NEAR(j, -c * dphi / dx * 0.9, 1e-9 * std::abs(j));
}

TEST(ScharfetterGummel, WallFacesCarryNoFlux) {
  const std::vector<double> n = {1.0, 2.0, 3.0};
  const std::vector<double> phi = {0.0, 0.1, 0.3};
  SpeciesParams s;
  s.valence = 1;
  EXPECT_EQ(sg_flux(n, phi, s, 1.0, 0, 0.1), 0.0);
  EXPECT_EQ(sg_flux(n, phi, s, 1.0, 3, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(sg_flux(n, phi, s, 1.0, 1, 0.1), sg_flux(1.0, 2.0, 0.0, 0.1, 1, 1.0, 0.1));
}

TEST(Pnp, UniformNeutralStateIsFixed) {
  const auto m = charged_model(16);
  auto s = make_pnp_state(m, std::vector<std::vector<double>>(2, std::vector<double>(16, 1.0)));
  for (int k = 0; k < 10; ++k) pnp_step(m, s, 1e-3);
  for (const auto& n : s.density)
    for (double v : n) EXPECT_NEAR(v, 1.0, 1e-15);
  const auto d = pnp_energy(m, s);
  EXPECT_NEAR(d.energy, 0.0, 1e-14);
  EXPECT_LE(std::abs(d.dissipation), 1e-10);
}

// n = 1 + a cos(pi x) decays as a exp(-pi^2 t) under n_t = n_xx with no-flux walls.
TEST(Pnp, HeatModeDecayRate) {
  PnpModel m;
  m.nx = 128;
  m.species.resize(1);
  m.background.assign(m.nx, 0.0);
  std::vector<double> n(m.nx);
  for (std::size_t j = 0; j < m.nx; ++j) n[j] = 1.0 + 0.5 * std::cos(std::numbers::pi * (j + 0.5) / m.nx);
  PnpSimulation sim(m, {n}, 1e-4);
  sim.advance_to(0.1);
  EXPECT_DOUBLE_EQ(sim.time(), 0.1);
  double amp = 0.0;
  for (std::size_t j = 0; j < m.nx; ++j)
    amp += 2.0 * (sim.state().density[0][j] - 1.0) * std::cos(std::numbers::pi * (j + 0.5) / m.nx) / m.nx;
  const double exact = 0.5 * std::exp(-std::numbers::pi * std::numbers::pi * 0.1);
  EXPECT_NEAR(amp / exact, 1.0, 0.01);
}

TEST(Pnp, ChargedRelaxationDissipatesAndConserves) {
  for (DiffusivityMode mode : {DiffusivityMode::kappa_over_zeta, DiffusivityMode::one_over_zeta}) {
    const auto m = charged_model(48, mode);
    PnpSimulation sim(m, cosine_pair(48, 0.4), 2e-4);
    double gap = pnp_equilibrium_gap(m, sim.state());
    for (int k = 0; k < 300; ++k) {
      sim.step(2e-4);
      const double g = pnp_equilibrium_gap(m, sim.state());
      EXPECT_LT(g, gap);
      gap = g;
    }
    const auto& h = sim.history();
    EXPECT_LE(pnp_worst_energy_increase(h), 1e-8);
    for (std::size_t n = 1; n < h.size(); ++n) {
      EXPECT_GE(h[n].dissipation, 0.0);
      // convexity of e makes backward Euler satisfy e_{n+1} + dt d_{n+1} <= e_n
      EXPECT_LE(h[n].energy + 2e-4 * h[n].dissipation, h[n - 1].energy + 1e-11);
      for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(h[n].mass[i], h[0].mass[i], 1e-13);
    }
  }
}

TEST(Pnp, DiffusivityModes) {
  const auto m = charged_model(4);
  EXPECT_DOUBLE_EQ(m.coefficient(0), 2.0);
  EXPECT_DOUBLE_EQ(m.coefficient(1), 0.25);
  const auto o = charged_model(4, DiffusivityMode::one_over_zeta);
  EXPECT_DOUBLE_EQ(o.coefficient(0), 1.0);
  EXPECT_DOUBLE_EQ(o.coefficient(1), 0.5);
}

TEST(Pnp, RejectsOversizedStep) {
  const auto m = charged_model(16);
  auto s = make_pnp_state(m, cosine_pair(16, 0.2));
  // sum c z^2 max n = (2 + 0.25) * 1.2 (up to the cell-centre cosine)
  const double bound = pnp_max_dt(m, s);
  EXPECT_NEAR(bound, 0.5 / (2.25 * (1.0 + 0.2 * std::cos(std::numbers::pi / 32))), 1e-12);
  EXPECT_THROW(pnp_step(m, s, 1.01 * bound), InvalidParameter);
  EXPECT_THROW(pnp_step(m, s, 0.0), InvalidParameter);
  EXPECT_NO_THROW(pnp_step(m, s, 0.99 * bound));
}

}  // namespace

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "vpfp/grid.hpp"

namespace {

using namespace vpfp;

TEST(DeriveScales, HandComputedGroups) {
  PhysicalScales p;
  p.m_ref = 2.0;
  p.tau_ref = 0.5;
  p.theta_ref = 4.0;
  p.charge = 1.0;
  p.permittivity = 2.0;
  p.length = 4.0;
  p.concentration = 0.5;
  p.potential = 3.0;
  p.mass = {2.0, 8.0};
  p.relaxation_time = {0.5, 0.25};
  p.valence = {1, -2};
  const auto g = derive_scales(p);
  // V_ref = 2, U_ref = 0.5 * 0.5 * 0.75
  EXPECT_DOUBLE_EQ(g.v_ref, 2.0);
  EXPECT_DOUBLE_EQ(g.u_ref, 0.1875);
  EXPECT_DOUBLE_EQ(g.epsilon, 0.25);
  EXPECT_DOUBLE_EQ(g.nu, 2.0 / 0.1875);
  EXPECT_DOUBLE_EQ(g.varpi, 0.75);
  EXPECT_DOUBLE_EQ(g.t0, 4.0 / 0.1875);
  ASSERT_EQ(g.species.size(), 2u);
  EXPECT_DOUBLE_EQ(g.species[1].kappa, 0.25);
  EXPECT_DOUBLE_EQ(g.species[1].zeta, 2.0);
  EXPECT_EQ(g.species[1].valence, -2);
}

TEST(DeriveScales, RejectsNonPositiveInputs) {
  PhysicalScales p;
  p.tau_ref = 0.0;
  EXPECT_THROW(derive_scales(p), InvalidParameter);
  PhysicalScales q;
  q.mass = {1.0};
  q.relaxation_time = {-1.0};
  try {
    derive_scales(q);
    FAIL();
  } catch (const InvalidParameter& e) {
    EXPECT_EQ(e.name(), "tau[0]");
  }
}

TEST(SpeciesValidation, NamesOffendingField) {
  SpeciesParams s;
  s.kappa = -1.0;
  try {
    validate(s, "species[1]");
    FAIL();
  } catch (const InvalidParameter& e) {
    EXPECT_EQ(e.name(), "species[1].kappa");
  }
  s.kappa = 1.0;
  s.zeta = std::nan("");
  EXPECT_THROW(validate(s), InvalidParameter);
}

TEST(PhaseGrid, MirrorSymmetricVelocities) {
  const PhaseGrid g(5, 34, 2.0, 7.3);
  for (std::size_t k = 0; k < g.nv(); ++k) EXPECT_EQ(g.v(g.nv() - 1 - k), -g.v(k));
  EXPECT_DOUBLE_EQ(g.dx(), 0.4);
  EXPECT_DOUBLE_EQ(g.dv(), 2.0 * 7.3 / 34.0);
  EXPECT_DOUBLE_EQ(g.x(0), 0.2);
  EXPECT_DOUBLE_EQ(g.max_speed(), 7.3 - 0.5 * g.dv());
}

TEST(PhaseGrid, RejectsBadShapes) {
  EXPECT_THROW(PhaseGrid(1, 8, 1.0, 1.0), InvalidParameter);
  EXPECT_THROW(PhaseGrid(4, 7, 1.0, 1.0), InvalidParameter);
  EXPECT_THROW(PhaseGrid(4, 8, 0.0, 1.0), InvalidParameter);
  EXPECT_THROW(PhaseGrid(4, 8, 1.0, -1.0), InvalidParameter);
}

TEST(DefaultVmax, ScalesWithLightestSpecies) {
  std::vector<SpeciesParams> s(2);
  s[0].kappa = 4.0;
  s[1].kappa = 0.5;
  EXPECT_DOUBLE_EQ(default_vmax(s), 16.0);
}

// Midpoint-rule moments of n * Gaussian(u, kappa) against their closed forms.
TEST(Moments, GaussianDensityAndCurrent) {
  const double kappa = 1.5, u = 0.3, eps = 0.25;
  const PhaseGrid g(3, 256, 1.0, 8.0 * std::sqrt(kappa));
  PhaseArray f(g);
  const std::vector<double> n = {0.5, 1.0, 2.0};
  for (std::size_t j = 0; j < g.nx(); ++j)
    for (std::size_t k = 0; k < g.nv(); ++k) {
      const double w = g.v(k) - u;
      f(j, k) = n[j] * std::exp(-w * w / (2 * kappa)) / std::sqrt(2 * std::numbers::pi * kappa);
    }
  const auto rho = density(f, g);
  const auto jx = current(f, g, eps);
  for (std::size_t j = 0; j < g.nx(); ++j) {
    EXPECT_NEAR(rho[j], n[j], 1e-12);
    EXPECT_NEAR(jx[j], n[j] * u / eps, 1e-12);
  }
  EXPECT_THROW(current(f, g, 0.0), InvalidParameter);
}

TEST(Moments, EvenDataHasExactlyZeroCurrent) {
  const PhaseGrid g(2, 16, 1.0, 4.0);
  PhaseArray f(g);
  for (std::size_t k = 0; k < g.nv(); ++k) f(0, k) = 1.0 / (1.0 + g.v(k) * g.v(k));
  for (std::size_t k = 0; k < g.nv() / 2; ++k) f(1, k) = f(1, g.nv() - 1 - k) = 0.1 * k + 0.7;
  for (double jx : current(f, g, 0.5)) EXPECT_EQ(jx, 0.0);
}

TEST(Neutrality, ResidualOfChargedState) {
  KineticState s;
  s.grid = PhaseGrid(4, 8, 2.0, 4.0);
  s.f.assign(2, PhaseArray(s.grid));
  for (auto& v : s.f[0].data()) v = 1.0 / 8.0;  // n = 1
  for (auto& v : s.f[1].data()) v = 1.0 / 16.0;  // n = 0.5
  std::vector<SpeciesParams> sp(2);
  sp[0].valence = 1;
  sp[1].valence = -2;
  const std::vector<double> bg(4, 0.0);
  EXPECT_NEAR(check_neutrality(s, sp, bg), 0.0, 1e-15);
  const std::vector<double> bg2(4, 0.25);
  EXPECT_NEAR(check_neutrality(s, sp, bg2), 0.5, 1e-15);
  EXPECT_NEAR(total_mass(s.f[0], s.grid), 2.0, 1e-15);
}

}  // namespace

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "vpfp/fokker_planck.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/poisson.hpp"
#include "vpfp/vpfp.hpp"

namespace vpfp {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// max_k |L_FP(M~)_k| on every x-independent row.
inline double maxwellian_nullspace_residual(const SpeciesParams& species, const PhaseGrid& grid) {
  const auto table = build_maxwellians(species, grid);
  const FokkerPlanckOperator op(species, grid);
  std::vector<double> out(grid.nv());
  op.apply(table.normalized, out);
  double worst = 0.0;
  for (double v : out) worst = std::max(worst, std::abs(v));
  return worst;
}

/// Max error of the Neumann solve of -phi'' = cos(pi x) on [0, 1] against cos(pi x) / pi^2.
inline double poisson_manufactured_error(std::size_t nx) {
  const double dx = 1.0 / static_cast<double>(nx);
  std::vector<double> rho(nx);
  double scale = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    rho[j] = std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) * dx);
    scale += std::abs(rho[j]) * dx;
  }
  const auto field = solve_poisson_charge(rho, scale, 1.0, dx);
  double worst = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    const double exact = rho[j] / (std::numbers::pi * std::numbers::pi);
    worst = std::max(worst, std::abs(field.potential[j] - exact));
  }
  return worst;
}

/**
 * Steps a two-species neutral global Maxwellian and returns the largest
 * per-step max-norm change of f.
 */
inline double equilibrium_drift(std::size_t steps, std::size_t nx = 32, std::size_t nv = 32,
                                double epsilon = 0.25) {
  std::vector<SpeciesParams> species(2);
  species[0].valence = 1;
  species[1].valence = -1;
  const PhaseGrid grid(nx, nv, 1.0, default_vmax(species));
  auto model = make_model(grid, species, {}, epsilon, 1.0);
  const std::vector<std::vector<double>> n(2, std::vector<double>(nx, 1.0));
  VpfpSimulation sim(model, well_prepared_state(model, n));
  double worst = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto before = sim.state().f;
    sim.step(sim.stable_dt());
    for (std::size_t i = 0; i < before.size(); ++i) {
      const auto& a = before[i].data();
      const auto& b = sim.state().f[i].data();
      for (std::size_t q = 0; q < a.size(); ++q) worst = std::max(worst, std::abs(a[q] - b[q]));
    }
  }
  return worst;
}

/// Operator identities run by the `checks` subcommand.
inline std::vector<CheckResult> run_identity_checks() {
  std::vector<CheckResult> out;
  SpeciesParams unit;
  unit.kappa = 1.0;

  {
    const PhaseGrid g(4, 64, 1.0, 8.0);
    const double r = maxwellian_nullspace_residual(unit, g);
    out.push_back({"maxwellian_nullspace", r, 1e-12, r <= 1e-12, "max |L_FP(M)|, Nv=64"});
  }
  {
    std::vector<double> res;
    for (std::size_t nv : {32, 64, 128}) res.push_back(fp_inverse_check(unit, PhaseGrid(4, nv, 1.0, 8.0)));
    const double r1 = res[0] / res[1];
    const double r2 = res[1] / res[2];
    const double worst = std::max(std::abs(r1 - 4.0), std::abs(r2 - 4.0));
    out.push_back({"fp_inverse_ratio", worst, 0.5, worst <= 0.5,
                   "residuals " + std::to_string(res[0]) + ", " + std::to_string(res[1]) + ", " +
                       std::to_string(res[2]) + " (Nv=32,64,128); |ratio-4| shown"});
  }
  {
    const double e64 = poisson_manufactured_error(64);
    out.push_back({"poisson_error_nx64", e64, 1.5e-3, e64 <= 1.5e-3, "max error, rho=cos(pi x)"});
    double lo = 1e300, hi = 0.0;
    double prev = poisson_manufactured_error(32);
    for (std::size_t nx : {64, 128, 256}) {
      const double e = poisson_manufactured_error(nx);
      lo = std::min(lo, prev / e);
      hi = std::max(hi, prev / e);
      prev = e;
    }
    out.push_back({"poisson_order_ratio_min", lo, 3.7, lo >= 3.7 && hi <= 4.3,
                   "ratios across Nx=32..256 in [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]"});
  }
  {
    const double d = equilibrium_drift(100);
    out.push_back({"equilibrium_stationarity", d, 1e-10, d <= 1e-10,
                   "max per-step change of a neutral global Maxwellian, 100 steps"});
  }
  return out;
}

}  // namespace vpfp

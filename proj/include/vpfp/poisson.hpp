#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vpfp/error.hpp"
#include "vpfp/grid.hpp"

namespace vpfp {

/**
 * Electrostatic state on the spatial grid.
 *
 * `potential` lives on the nx cell centres and has zero mean. `field` is
 * E = -dphi/dx on the nx+1 faces; both wall entries are exactly zero.
 */
struct FieldState {
  std::vector<double> potential;
  std::vector<double> field;
  std::vector<double> background;
  double varpi = 1.0;

  /// Cell-centred E, the average of the two adjacent faces.
  std::vector<double> field_at_centers() const {
    std::vector<double> out(potential.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = 0.5 * (field[j] + field[j + 1]);
    return out;
  }

  double max_abs_field() const noexcept {
    double m = 0.0;
    for (double e : field) m = std::max(m, std::abs(e));
    return m;
  }
};

/// Centred face differences -(phi_{j+1} - phi_j)/dx; Neumann walls give 0.
inline std::vector<double> electric_field(std::span<const double> potential, double dx) {
  const std::size_t nx = potential.size();
  std::vector<double> e(nx + 1, 0.0);
  for (std::size_t j = 1; j < nx; ++j) e[j] = -(potential[j] - potential[j - 1]) / dx;
  return e;
}

inline std::vector<double> electric_field(const FieldState& state, double dx) {
  return electric_field(state.potential, dx);
}

/// Relative neutrality tolerance applied before every Neumann solve.
inline constexpr double kNeutralityTolerance = 1e-10;

/**
 * Solves -varpi phi'' = rho on [0, L] with phi' = 0 at both walls and zero mean.
 *
 * The Neumann Laplacian is singular, so the source is first projected onto
 * zero-mean data (after checking it is neutral to kNeutralityTolerance * scale).
 * The remaining tridiagonal system factors into two bidiagonal sweeps: face
 * fields accumulate the charge from the left wall, then the potential is
 * recovered and shifted to zero mean.
 */
inline FieldState solve_poisson_charge(std::span<const double> rho, double scale, double varpi,
                                       double dx) {
  if (!(varpi > 0.0)) throw InvalidParameter("varpi", "must be positive");
  const std::size_t nx = rho.size();
  double total = 0.0;
  for (double r : rho) total += r;
  const double residual = total * dx;
  if (std::abs(residual) > kNeutralityTolerance * scale) {
    throw NonCompatibleSource(residual, scale);
  }
  const double mean = total / static_cast<double>(nx);

  FieldState out;
  out.varpi = varpi;
  out.field.assign(nx + 1, 0.0);
  out.potential.assign(nx, 0.0);
  double displacement = 0.0;  // varpi * E on the current face
  for (std::size_t j = 0; j + 1 < nx; ++j) {
    displacement += (rho[j] - mean) * dx;
    out.field[j + 1] = displacement / varpi;
    out.potential[j + 1] = out.potential[j] - dx * out.field[j + 1];
  }
  double shift = 0.0;
  for (double p : out.potential) shift += p;
  shift /= static_cast<double>(nx);
  for (double& p : out.potential) p -= shift;
  return out;
}

/// Charge density sum_i z_i n_i + D on the cell centres.
inline std::vector<double> charge_density(const std::vector<std::vector<double>>& densities,
                                          std::span<const SpeciesParams> species,
                                          std::span<const double> background) {
  std::vector<double> rho(background.begin(), background.end());
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (species[i].valence == 0) continue;
    for (std::size_t j = 0; j < rho.size(); ++j) rho[j] += species[i].valence * densities[i][j];
  }
  return rho;
}

inline FieldState solve_poisson(const std::vector<std::vector<double>>& densities,
                                std::span<const SpeciesParams> species,
                                std::span<const double> background, double varpi, double dx) {
  const auto rho = charge_density(densities, species, background);
  const double scale = charge_scale(densities, species, background, dx);
  FieldState out = solve_poisson_charge(rho, scale, varpi, dx);
  out.background.assign(background.begin(), background.end());
  return out;
}

inline FieldState solve_poisson(const MomentFields& moments, std::span<const SpeciesParams> species,
                                std::span<const double> background, double varpi,
                                const PhaseGrid& grid) {
  return solve_poisson(moments.density, species, background, varpi, grid.dx());
}

/// Max-norm residual of -varpi (phi_{j+1} - 2 phi_j + phi_{j-1}) / dx^2 - rho with mirrored ghosts.
inline double poisson_residual(const FieldState& field, std::span<const double> rho, double dx) {
  const auto& phi = field.potential;
  const std::size_t nx = phi.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    const double left = j > 0 ? phi[j - 1] : phi[j];
    const double right = j + 1 < nx ? phi[j + 1] : phi[j];
    const double lap = (right - 2.0 * phi[j] + left) / (dx * dx);
    worst = std::max(worst, std::abs(-field.varpi * lap - rho[j]));
  }
  return worst;
}

/// (varpi/2) sum_faces |E|^2 dx.
inline double field_energy(const FieldState& field, double dx) {
  double acc = 0.0;
  for (double e : field.field) acc += e * e;
  return 0.5 * field.varpi * acc * dx;
}

}  // namespace vpfp

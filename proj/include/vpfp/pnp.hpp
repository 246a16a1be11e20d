#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vpfp/config.hpp"
#include "vpfp/error.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/numerics.hpp"
#include "vpfp/poisson.hpp"

namespace vpfp {

struct PnpModel {
  std::size_t nx = 0;
  double length = 1.0;
  std::vector<SpeciesParams> species;
  std::vector<double> background;
  double varpi = 1.0;
  DiffusivityMode mode = DiffusivityMode::kappa_over_zeta;
  double gummel_tolerance = 1e-13;
  int gummel_max_iterations = 200;

  double dx() const noexcept { return length / static_cast<double>(nx); }
  double coefficient(std::size_t i) const { return diffusivity(species.at(i), mode); }
};

inline PnpModel make_pnp_model(const RunConfig& config, DiffusivityMode mode) {
  const PhaseGrid grid = config.make_grid();
  PnpModel m;
  m.nx = config.nx;
  m.length = config.length;
  m.species = config.species;
  m.background = config.background.sample(grid);
  m.varpi = config.varpi;
  m.mode = mode;
  return m;
}

struct PnpState {
  std::vector<std::vector<double>> density;
  FieldState field;
  double time = 0.0;
  DiffusivityMode mode = DiffusivityMode::kappa_over_zeta;
};

struct PnpDiagnostics {
  double time = 0.0;
  double energy = 0.0;
  double field_energy = 0.0;
  double dissipation = 0.0;
  std::vector<double> mass;
  int gummel_iterations = 0;
};

/**
 * Scharfetter-Gummel flux from cell L to cell R,
 *   J = (c/dx) [B(dpsi) n_L - B(-dpsi) n_R],  dpsi = z (phi_R - phi_L),
 * which vanishes on every discrete Boltzmann profile n = C exp(-z phi).
 */
inline double sg_flux(double n_left, double n_right, double phi_left, double phi_right,
                      int valence, double coefficient, double dx) noexcept {
  const double dpsi = valence * (phi_right - phi_left);
  return coefficient / dx * (bernoulli(dpsi) * n_left - bernoulli(-dpsi) * n_right);
}

/// Flux on face `face` (0..nx); the wall faces carry none.
inline double sg_flux(std::span<const double> n, std::span<const double> phi,
                      const SpeciesParams& species, double coefficient, std::size_t face,
                      double dx) noexcept {
  if (face == 0 || face >= n.size()) return 0.0;
  return sg_flux(n[face - 1], n[face], phi[face - 1], phi[face], species.valence, coefficient,
                 dx);
}

inline FieldState solve_pnp_field(const PnpModel& model,
                                  const std::vector<std::vector<double>>& n) {
  return solve_poisson(n, model.species, model.background, model.varpi, model.dx());
}

inline PnpState make_pnp_state(const PnpModel& model, std::vector<std::vector<double>> n) {
  if (n.size() != model.species.size())
    throw InvalidParameter("densities", "one profile per species required");
  PnpState s;
  s.density = std::move(n);
  s.field = solve_pnp_field(model, s.density);
  s.mode = model.mode;
  return s;
}

/// Largest step accepted by pnp_step: 0.5 varpi / sum_i c_i z_i^2 max n_i.
inline double pnp_max_dt(const PnpModel& model, const PnpState& state) {
  double sigma = 0.0;
  for (std::size_t i = 0; i < model.species.size(); ++i) {
    const double z = model.species[i].valence;
    if (z == 0.0) continue;
    const double nmax = *std::max_element(state.density[i].begin(), state.density[i].end());
    sigma += model.coefficient(i) * z * z * std::max(nmax, 0.0);
  }
  return sigma > 0.0 ? 0.5 * model.varpi / sigma : std::numeric_limits<double>::infinity();
}

/// Backward Euler in n for a frozen potential: a conservative tridiagonal M-matrix solve.
inline void pnp_transport_solve(std::span<const double> n_old, std::span<const double> phi,
                                const SpeciesParams& species, double coefficient, double dt,
                                double dx, std::span<double> n_new,
                                std::vector<double>& work) {
  const std::size_t nx = n_old.size();
  work.resize(4 * nx);
  std::span<double> lower(work.data(), nx);
  std::span<double> diag(work.data() + nx, nx);
  std::span<double> upper(work.data() + 2 * nx, nx);
  std::span<double> rhs(work.data() + 3 * nx, nx);
  std::vector<double> scratch;
  const double r = dt / dx;
  for (std::size_t j = 0; j < nx; ++j) {
    diag[j] = 1.0;
    lower[j] = 0.0;
    upper[j] = 0.0;
    rhs[j] = n_old[j];
  }
  // face between j and j+1: J = a n_j - b n_{j+1}
  for (std::size_t j = 0; j + 1 < nx; ++j) {
    const double dpsi = species.valence * (phi[j + 1] - phi[j]);
    const double a = coefficient / dx * bernoulli(dpsi);
    const double b = coefficient / dx * bernoulli(-dpsi);
    diag[j] += r * a;
    upper[j] = -r * b;
    diag[j + 1] += r * b;
    lower[j + 1] = -r * a;
  }
  solve_tridiagonal(lower, diag, upper, rhs, n_new, scratch);
}

/**
 * One backward Euler step of the PNP system. Transport solves with a frozen
 * potential alternate with Poisson solves (Gummel iteration) until the
 * densities stop changing, so the step is implicit in both n and phi.
 * Returns the number of Gummel sweeps.
 */
inline int pnp_step(const PnpModel& model, PnpState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("dt", "must be positive");
  const double limit = pnp_max_dt(model, state);
  if (dt > limit)
    throw InvalidParameter("dt", "exceeds the PNP step bound " + std::to_string(limit));
  const std::size_t ns = model.species.size();
  const double dx = model.dx();
  auto next = state.density;
  FieldState field = state.field;
  std::vector<double> work, candidate(model.nx);
  double scale = 0.0;
  for (const auto& n : state.density) {
    for (double v : n) scale = std::max(scale, std::abs(v));
  }
  bool charged = false;
  for (const auto& s : model.species) charged = charged || s.valence != 0;

  int iteration = 0;
  while (true) {
    ++iteration;
    double change = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
      pnp_transport_solve(state.density[i], field.potential, model.species[i],
                          model.coefficient(i), dt, dx, candidate, work);
      for (std::size_t j = 0; j < model.nx; ++j) {
        change = std::max(change, std::abs(candidate[j] - next[i][j]));
      }
      next[i] = candidate;
    }
    field = solve_pnp_field(model, next);
    if (!charged || (iteration > 1 && change <= model.gummel_tolerance * std::max(scale, 1.0)))
      break;
    if (iteration >= model.gummel_max_iterations)
      throw SolverFailure("Gummel iteration did not converge", static_cast<std::size_t>(iteration));
  }
  state.density = std::move(next);
  state.field = std::move(field);
  state.time += dt;
  return iteration;
}

/**
 * e = sum_i sum_j n log n dx + (varpi/2) sum |E|^2 dx and its discrete dissipation
 * -sum_i sum_faces J_f (mu_{j+1} - mu_j), mu = log n + z phi, with J the SG flux of the
 * model's diffusivity mode.
 */
inline PnpDiagnostics pnp_energy(const PnpModel& model, const PnpState& state) {
  const double dx = model.dx();
  PnpDiagnostics d;
  d.time = state.time;
  CompensatedSum entropy;
  CompensatedSum dissipation;
  for (std::size_t i = 0; i < model.species.size(); ++i) {
    const auto& n = state.density[i];
    const auto& phi = state.field.potential;
    CompensatedSum mass;
    for (double v : n) {
      entropy.add(entropy_density(v));
      mass.add(v);
    }
    d.mass.push_back(mass.value() * dx);
    const double c = model.coefficient(i);
    const int z = model.species[i].valence;
    for (std::size_t j = 0; j + 1 < model.nx; ++j) {
      const double flux = sg_flux(n[j], n[j + 1], phi[j], phi[j + 1], z, c, dx);
      if (n[j] > 0.0 && n[j + 1] > 0.0) {
        const double dmu = std::log(n[j + 1] / n[j]) + z * (phi[j + 1] - phi[j]);
        dissipation.add(-flux * dmu);
      } else if (flux != 0.0) {
        dissipation.add(std::numeric_limits<double>::infinity());
      }
    }
  }
  d.field_energy = field_energy(state.field, dx);
  d.energy = entropy.value() * dx + d.field_energy;
  d.dissipation = dissipation.value();
  return d;
}

/// Max over interior faces of |d/dx (log n_i + z_i phi)|.
inline double pnp_equilibrium_gap(const PnpModel& model, const PnpState& state) {
  const double dx = model.dx();
  double worst = 0.0;
  for (std::size_t i = 0; i < model.species.size(); ++i) {
    const auto& n = state.density[i];
    const auto& phi = state.field.potential;
    for (std::size_t j = 0; j + 1 < model.nx; ++j) {
      const double g = (std::log(n[j + 1] / n[j]) +
                        model.species[i].valence * (phi[j + 1] - phi[j])) / dx;
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

/// Fixed-step PNP integration with a diagnostics row per step.
class PnpSimulation {
 public:
  PnpSimulation(PnpModel model, std::vector<std::vector<double>> initial, double dt)
      : model_(std::move(model)), dt_(dt) {
    if (!(dt > 0.0)) throw InvalidParameter("pnp.dt", "must be positive");
    state_ = make_pnp_state(model_, std::move(initial));
    history_.push_back(pnp_energy(model_, state_));
  }

  const PnpModel& model() const noexcept { return model_; }
  const PnpState& state() const noexcept { return state_; }
  const std::vector<PnpDiagnostics>& history() const noexcept { return history_; }
  double time() const noexcept { return state_.time; }

  void step(double dt) {
    const int iterations = pnp_step(model_, state_, dt);
    history_.push_back(pnp_energy(model_, state_));
    history_.back().gummel_iterations = iterations;
  }

  void advance_to(double target) {
    while (state_.time < target) {
      const double remaining = target - state_.time;
      const bool last = remaining <= dt_ * (1.0 + 1e-9);
      step(last ? remaining : dt_);
      if (last) {
        state_.time = target;
        history_.back().time = target;
      }
    }
  }

 private:
  PnpModel model_;
  PnpState state_;
  double dt_;
  std::vector<PnpDiagnostics> history_;
};

/// Largest per-step increase of e along a PNP history.
inline double pnp_worst_energy_increase(const std::vector<PnpDiagnostics>& history) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < history.size(); ++n)
    worst = std::max(worst, history[n].energy - history[n - 1].energy);
  return worst;
}

}  // namespace vpfp

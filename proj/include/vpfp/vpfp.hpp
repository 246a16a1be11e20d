#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vpfp/config.hpp"
#include "vpfp/error.hpp"
#include "vpfp/fokker_planck.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/numerics.hpp"
#include "vpfp/poisson.hpp"
#include "vpfp/transport.hpp"

namespace vpfp {

/// Order of the sub-steps inside one vpfp_step; written to every run manifest.
inline constexpr const char* kSplittingOrder =
    "poisson -> wall traces with reflection -> x-transport -> v-transport -> "
    "implicit Chang-Cooper collision -> poisson";

/// Per-step free-energy tolerance, relative to |E(0)|.
inline constexpr double kDissipationStepTolerance = 1e-6;
/// Jensen-gap floor accepted as non-negative.
inline constexpr double kInformationTolerance = 1e-14;

/// Everything a VPFP run needs that does not change in time.
struct VpfpModel {
  PhaseGrid grid;
  std::vector<SpeciesParams> species;
  std::vector<double> background;
  double epsilon = 1.0;
  double varpi = 1.0;
  double cfl = 0.9;
  ReflectionMode reflection = ReflectionMode::diffuse;
  std::vector<MaxwellianTable> maxwellians;
  std::vector<WallQuadrature> walls;
  std::vector<FokkerPlanckOperator> collisions;

  std::size_t species_count() const noexcept { return species.size(); }
};

inline VpfpModel make_model(PhaseGrid grid, std::vector<SpeciesParams> species,
                            std::vector<double> background, double epsilon, double varpi,
                            ReflectionMode reflection = ReflectionMode::diffuse,
                            double cfl = 0.9) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon", "must be positive");
  if (!(varpi > 0.0)) throw InvalidParameter("varpi", "must be positive");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidParameter("cfl", "must lie in (0, 1]");
  if (background.empty()) background.assign(grid.nx(), 0.0);
  if (background.size() != grid.nx())
    throw InvalidParameter("background", "needs one value per x-cell");
  VpfpModel m;
  m.grid = std::move(grid);
  m.species = std::move(species);
  m.background = std::move(background);
  m.epsilon = epsilon;
  m.varpi = varpi;
  m.cfl = cfl;
  m.reflection = reflection;
  for (std::size_t i = 0; i < m.species.size(); ++i) {
    validate(m.species[i], "species[" + std::to_string(i) + "]");
    m.maxwellians.push_back(build_maxwellians(m.species[i], m.grid));
    m.walls.push_back(build_wall_quadrature(m.maxwellians.back(), m.grid));
    m.collisions.emplace_back(m.species[i], m.grid);
  }
  return m;
}

inline VpfpModel make_model(const RunConfig& config, double epsilon) {
  if (config.scaling == Scaling::high_field)
    throw NotImplemented("high-field scaling is accepted in configs but has no solver");
  PhaseGrid grid = config.make_grid();
  auto background = config.background.sample(grid);
  return make_model(std::move(grid), config.species, std::move(background), epsilon,
                    config.varpi, config.reflection, config.cfl);
}

/// Kinetic data n_i(x) M~_i(v) for every species.
inline KineticState well_prepared_state(const VpfpModel& model,
                                        const std::vector<std::vector<double>>& densities) {
  if (densities.size() != model.species_count())
    throw InvalidParameter("densities", "one profile per species required");
  KineticState s;
  s.grid = model.grid;
  s.epsilon = model.epsilon;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    PhaseArray f(model.grid);
    const auto& mt = model.maxwellians[i].normalized;
    for (std::size_t j = 0; j < model.grid.nx(); ++j) {
      auto row = f.row(j);
      for (std::size_t k = 0; k < model.grid.nv(); ++k) row[k] = densities[i][j] * mt[k];
    }
    s.f.push_back(std::move(f));
  }
  return s;
}

inline std::vector<std::vector<double>> densities(const KineticState& state) {
  std::vector<std::vector<double>> n;
  for (std::size_t i = 0; i < state.species_count(); ++i) n.push_back(density(state, i));
  return n;
}

inline FieldState solve_field(const VpfpModel& model, const KineticState& state) {
  return solve_poisson(densities(state), model.species, model.background, model.varpi,
                       model.grid.dx());
}

/// 0.9 eps min(dx / V_max, dv / (max_i kappa_i |z_i| max|E|)) with the model's CFL factor.
inline double stable_dt(const VpfpModel& model, const FieldState& field) {
  const auto& g = model.grid;
  double dt = g.dx() / g.vmax();
  double drive = 0.0;
  for (const auto& s : model.species) drive = std::max(drive, s.kappa * std::abs(s.valence));
  const double emax = field.max_abs_field();
  if (drive * emax > 0.0) dt = std::min(dt, g.dv() / (drive * emax));
  return model.cfl * model.epsilon * dt;
}

/**
 * Discrete entropy production D = 4 kappa^2 sum (M~)_face ((h_{k+1} - h_k) / dv)^2 dv dx
 * with h = sqrt(f / M~).
 *
 * This is the integral of (v sqrt f + 2 kappa d/dv sqrt f)^2 rewritten as
 * 4 kappa^2 M~ |d/dv sqrt(f/M~)|^2; the forward difference is taken across
 * each velocity face and weighted by the arithmetic mean of M~ on the two
 * adjacent cells. Any f = n(x) M~ gives exactly zero.
 */
inline double entropy_production(const PhaseArray& f, const SpeciesParams& species,
                                 const MaxwellianTable& table, const PhaseGrid& grid) {
  const std::size_t nv = grid.nv();
  const auto& m = table.normalized;
  std::vector<double> h(nv);
  CompensatedSum acc;
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const auto row = f.row(j);
    for (std::size_t k = 0; k < nv; ++k) h[k] = std::sqrt(std::max(row[k], 0.0) / m[k]);
    for (std::size_t k = 0; k + 1 < nv; ++k) {
      const double d = (h[k + 1] - h[k]) / grid.dv();
      acc.add(0.5 * (m[k] + m[k + 1]) * d * d);
    }
  }
  return 4.0 * species.kappa * species.kappa * acc.value() * grid.dv() * grid.dx();
}

inline double entropy_production(const VpfpModel& model, const KineticState& state,
                                 std::size_t species) {
  return entropy_production(state.f.at(species), model.species.at(species),
                            model.maxwellians.at(species), model.grid);
}

/// r log r - r + 1 >= 0, evaluated without cancellation near r = 1.
inline double bregman_entropy(double r) noexcept {
  const double u = r - 1.0;
  if (std::abs(u) < 1e-3) {
    return u * u * (0.5 - u * (1.0 / 6.0 - u * (1.0 / 12.0 - u / 20.0)));
  }
  return (r > 0.0 ? r * std::log(r) : 0.0) - u;
}

/**
 * Darrozes-Guiraud information of the outgoing trace at a wall:
 * I = sum_m mu_m H(w_m) - |mu| H(sum_m mu_m w_m / |mu|), w = gamma_+ f / M,
 * mu_m = M |v| dv. It is evaluated as the sum of the non-negative Bregman terms
 * mu_m wbar (r log r - r + 1), r = w_m / wbar, so the Jensen gap is never
 * negative through cancellation.
 */
inline double dg_information(std::span<const double> trace, Wall wall, const WallQuadrature& wq,
                             const PhaseGrid& grid) {
  const std::size_t half = grid.nv() / 2;
  std::vector<double> w(half);
  CompensatedSum mean;
  for (std::size_t m = 0; m < half; ++m) {
    w[m] = trace[outgoing_index(wall, m, grid.nv())] / wq.maxwellian[m];
    mean.add(wq.weights[m] * w[m]);
  }
  const double wbar = mean.value() / wq.norm;
  if (!(wbar > 0.0)) return 0.0;
  CompensatedSum acc;
  for (std::size_t m = 0; m < half; ++m) acc.add(wq.weights[m] * wbar * bregman_entropy(w[m] / wbar));
  return acc.value();
}

/// Sum_i sum (v^2/(2 kappa_i) f + f log f) dv dx + (varpi/2) sum |E|^2 dx.
inline double free_energy(const VpfpModel& model, const KineticState& state,
                          const FieldState& field) {
  const auto& g = model.grid;
  CompensatedSum acc;
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    const double inv = 1.0 / (2.0 * model.species[i].kappa);
    for (std::size_t j = 0; j < g.nx(); ++j) {
      const auto row = state.f[i].row(j);
      for (std::size_t k = 0; k < g.nv(); ++k) {
        acc.add(g.v(k) * g.v(k) * inv * row[k] + entropy_density(row[k]));
      }
    }
  }
  return acc.value() * g.dv() * g.dx() + field_energy(field, g.dx());
}

struct DiagnosticsRecord {
  double time = 0.0;
  double dt = 0.0;  // size of the step that produced this record (0 for the initial one)
  std::vector<double> mass;
  double free_energy = 0.0;
  double field_energy = 0.0;
  std::vector<double> entropy_production;
  std::vector<std::array<double, 2>> dg_info;    // [left, right] per species
  std::vector<std::array<double, 2>> wall_flux;  // J.n at [left, right] per species
  double neutrality = 0.0;
  double min_f = 0.0;
};

struct StepReport {
  double dt = 0.0;
  double x_courant = 0.0;
  double v_courant = 0.0;
  std::vector<std::array<WallTrace, 2>> traces;
};

/**
 * One splitting cycle on (state, field). `field` must be the Poisson solution
 * for `state` on entry and is refreshed on exit.
 */
inline StepReport vpfp_step(const VpfpModel& model, KineticState& state, FieldState& field,
                            double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("dt", "must be positive");
  const auto& g = model.grid;
  const double eps = model.epsilon;
  StepReport report;
  report.dt = dt;

  for (std::size_t i = 0; i < state.species_count(); ++i) {
    auto left = boundary_trace(state.f[i], g, Wall::left, model.reflection, model.walls[i]);
    auto right = boundary_trace(state.f[i], g, Wall::right, model.reflection, model.walls[i]);
    const auto x = transport_x_step(state.f[i], dt, eps, g, left, right);
    report.x_courant = std::max(report.x_courant, x.courant);
    report.traces.push_back({std::move(left), std::move(right)});
  }

  const auto centre = field.field_at_centers();
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    const double c = transport_v_step(state.f[i], centre, dt, model.species[i], eps, g);
    report.v_courant = std::max(report.v_courant, c);
  }

  for (std::size_t i = 0; i < state.species_count(); ++i) {
    fp_implicit_step(state.f[i], model.species[i].zeta * dt / (eps * eps), model.collisions[i]);
  }

  state.time += dt;
  field = solve_field(model, state);
  return report;
}

/// Diagnostics of `state`; `traces` are the wall traces the last step used (or fresh ones).
inline DiagnosticsRecord diagnose(const VpfpModel& model, const KineticState& state,
                                  const FieldState& field,
                                  const std::vector<std::array<WallTrace, 2>>& traces,
                                  double dt) {
  const auto& g = model.grid;
  DiagnosticsRecord r;
  r.time = state.time;
  r.dt = dt;
  r.field_energy = field_energy(field, g.dx());
  r.free_energy = free_energy(model, state, field);
  r.min_f = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    r.mass.push_back(total_mass(state.f[i], g));
    r.entropy_production.push_back(entropy_production(model, state, i));
    std::array<double, 2> info{};
    std::array<double, 2> flux{};
    for (std::size_t w = 0; w < 2; ++w) {
      const Wall wall = w == 0 ? Wall::left : Wall::right;
      info[w] = dg_information(traces[i][w].values, wall, model.walls[i], g);
      flux[w] = trace_flux(traces[i][w].values, wall, g, model.epsilon);
    }
    r.dg_info.push_back(info);
    r.wall_flux.push_back(flux);
    r.min_f = std::min(r.min_f, state.f[i].min());
  }
  r.neutrality = check_neutrality(state, model.species, model.background);
  return r;
}

inline std::vector<std::array<WallTrace, 2>> current_traces(const VpfpModel& model,
                                                            const KineticState& state) {
  std::vector<std::array<WallTrace, 2>> t;
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    t.push_back({boundary_trace(state.f[i], model.grid, Wall::left, model.reflection,
                                model.walls[i]),
                 boundary_trace(state.f[i], model.grid, Wall::right, model.reflection,
                                model.walls[i])});
  }
  return t;
}

/// Time integration with the adaptive step policy and a diagnostics record per step.
class VpfpSimulation {
 public:
  VpfpSimulation(VpfpModel model, KineticState initial)
      : model_(std::move(model)), state_(std::move(initial)) {
    if (state_.species_count() != model_.species_count())
      throw InvalidParameter("state", "species count differs from the model");
    state_.epsilon = model_.epsilon;
    field_ = solve_field(model_, state_);
    history_.push_back(diagnose(model_, state_, field_, current_traces(model_, state_), 0.0));
  }

  const VpfpModel& model() const noexcept { return model_; }
  const KineticState& state() const noexcept { return state_; }
  const FieldState& field() const noexcept { return field_; }
  const std::vector<DiagnosticsRecord>& history() const noexcept { return history_; }
  double time() const noexcept { return state_.time; }

  double stable_dt() const { return vpfp::stable_dt(model_, field_); }

  StepReport step(double dt) {
    auto report = vpfp_step(model_, state_, field_, dt);
    history_.push_back(diagnose(model_, state_, field_, report.traces, dt));
    return report;
  }

  /// Steps until time == target exactly; the last two steps share the remainder
  /// when a single stable step would overshoot by a small margin.
  template <class OnStep>
  void advance_to(double target, OnStep&& on_step) {
    while (state_.time < target) {
      const double remaining = target - state_.time;
      const double stable = stable_dt();
      double dt = remaining;
      if (remaining > stable) dt = remaining < 2.0 * stable ? 0.5 * remaining : stable;
      const bool last = dt == remaining;
      const auto report = step(dt);
      if (last) {
        state_.time = target;
        history_.back().time = target;
      }
      on_step(*this, report);
    }
  }

  void advance_to(double target) {
    advance_to(target, [](const VpfpSimulation&, const StepReport&) {});
  }

 private:
  VpfpModel model_;
  KineticState state_;
  FieldState field_;
  std::vector<DiagnosticsRecord> history_;
};

struct DissipationReport {
  bool passed = true;
  double energy0 = 0.0;
  double step_tolerance = 0.0;
  /// max_n [E_n + budget_n - E_0 - n tol]; positive means the inequality failed.
  double worst_slack = -std::numeric_limits<double>::infinity();
  std::size_t worst_slack_index = 0;
  /// max_n (E_n - E_{n-1}).
  double worst_step_increase = -std::numeric_limits<double>::infinity();
  std::size_t worst_step_index = 0;
  double min_entropy_production = std::numeric_limits<double>::infinity();
  double min_dg_info = std::numeric_limits<double>::infinity();
  /// Final value of sum dt [sum_i zeta_i/(kappa_i eps^2) D^i + (1/eps) sum_i I^i].
  double dissipated = 0.0;
  std::vector<std::string> violations;
};

/**
 * Checks E(t_n) + sum_{m<=n} dt_m [sum_i zeta_i/(kappa_i eps^2) D^i_m + (1/eps) sum_i I^i_m]
 * <= E(0) + n tol, per-step monotonicity E_n <= E_{n-1} + tol, D >= 0 and I >= -1e-14,
 * where tol = rel_tol |E(0)|. Record 0 is the initial state.
 */
inline DissipationReport verify_dissipation(const std::vector<DiagnosticsRecord>& series,
                                            std::span<const SpeciesParams> species,
                                            double epsilon,
                                            double rel_tol = kDissipationStepTolerance) {
  DissipationReport rep;
  if (series.empty()) return rep;
  rep.energy0 = series.front().free_energy;
  rep.step_tolerance = rel_tol * std::abs(rep.energy0);
  auto flag = [&rep](std::string message) {
    rep.passed = false;
    if (rep.violations.size() < 32) rep.violations.push_back(std::move(message));
  };
  CompensatedSum budget;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const auto& r = series[n];
    for (std::size_t i = 0; i < r.entropy_production.size(); ++i) {
      rep.min_entropy_production = std::min(rep.min_entropy_production, r.entropy_production[i]);
      if (r.entropy_production[i] < 0.0)
        flag("negative entropy production at record " + std::to_string(n));
      for (double info : r.dg_info[i]) {
        rep.min_dg_info = std::min(rep.min_dg_info, info);
        if (info < -kInformationTolerance)
          flag("negative boundary information at record " + std::to_string(n));
      }
    }
    if (n == 0) continue;
    double rate = 0.0;
    for (std::size_t i = 0; i < r.entropy_production.size(); ++i) {
      rate += species[i].zeta / (species[i].kappa * epsilon * epsilon) * r.entropy_production[i];
      rate += (r.dg_info[i][0] + r.dg_info[i][1]) / epsilon;
    }
    budget.add(r.dt * rate);
    const double slack = r.free_energy + budget.value() - rep.energy0 -
                         static_cast<double>(n) * rep.step_tolerance;
    if (slack > rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_slack_index = n;
    }
    if (slack > 0.0) flag("dissipation inequality violated at record " + std::to_string(n));
    const double increase = r.free_energy - series[n - 1].free_energy;
    if (increase > rep.worst_step_increase) {
      rep.worst_step_increase = increase;
      rep.worst_step_index = n;
    }
    if (increase > rep.step_tolerance)
      flag("free energy increased at record " + std::to_string(n));
  }
  rep.dissipated = budget.value();
  return rep;
}

}  // namespace vpfp

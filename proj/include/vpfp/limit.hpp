#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vpfp/config.hpp"
#include "vpfp/fokker_planck.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/numerics.hpp"
#include "vpfp/pnp.hpp"
#include "vpfp/poisson.hpp"
#include "vpfp/vpfp.hpp"

namespace vpfp {

/// Tolerance on the Csiszar-Kullback residual rhs - lhs.
inline constexpr double kCkTolerance = 1e-10;
/// Tolerance on the log-Sobolev residual bound - relent (face-differenced D).
inline constexpr double kLogSobolevTolerance = 1e-8;

/**
 * sum f log(f / (n M~)) dv dx, accumulated as the non-negative terms
 * g (r log r - r + 1) with g = n M~, r = f / g. The extra terms sum to zero
 * because n is the velocity integral of f.
 */
inline double relative_entropy(const PhaseArray& f, std::span<const double> n,
                               const MaxwellianTable& table, const PhaseGrid& grid) {
  CompensatedSum acc;
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    if (!(n[j] > 0.0)) continue;
    const auto row = f.row(j);
    for (std::size_t k = 0; k < grid.nv(); ++k) {
      const double g = n[j] * table.normalized[k];
      if (g > 0.0) {
        acc.add(g * bregman_entropy(row[k] / g));
      } else if (row[k] > 0.0) {
        return std::numeric_limits<double>::infinity();
      }
    }
  }
  return acc.value() * grid.dv() * grid.dx();
}

inline double relative_entropy(const VpfpModel& model, const KineticState& state,
                               const MomentFields& moments, std::size_t species) {
  return relative_entropy(state.f.at(species), moments.density.at(species),
                          model.maxwellians.at(species), model.grid);
}

/// sum |f - n M~| dv dx.
inline double maxwellian_gap(const PhaseArray& f, std::span<const double> n,
                             const MaxwellianTable& table, const PhaseGrid& grid) {
  CompensatedSum acc;
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const auto row = f.row(j);
    for (std::size_t k = 0; k < grid.nv(); ++k)
      acc.add(std::abs(row[k] - n[j] * table.normalized[k]));
  }
  return acc.value() * grid.dv() * grid.dx();
}

struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const noexcept { return rhs - lhs; }
};

/// (sum |f - n M~|)^2 against 4 (int n) relative entropy.
inline InequalitySides ck_check(const PhaseArray& f, const MaxwellianTable& table,
                                const PhaseGrid& grid) {
  const auto n = density(f, grid);
  double mass = 0.0;
  for (double v : n) mass += v;
  mass *= grid.dx();
  const double gap = maxwellian_gap(f, n, table, grid);
  return {gap * gap, 4.0 * mass * relative_entropy(f, n, table, grid)};
}

inline InequalitySides ck_check(const VpfpModel& model, const KineticState& state,
                                std::size_t species) {
  return ck_check(state.f.at(species), model.maxwellians.at(species), model.grid);
}

/**
 * Relative entropy against the Gaussian log-Sobolev bound D / (2 kappa).
 * lhs is the relative entropy, rhs the bound.
 */
inline InequalitySides logsobolev_check(const PhaseArray& f, const SpeciesParams& species,
                                        const MaxwellianTable& table, const PhaseGrid& grid) {
  const auto n = density(f, grid);
  return {relative_entropy(f, n, table, grid),
          entropy_production(f, species, table, grid) / (2.0 * species.kappa)};
}

inline InequalitySides logsobolev_check(const VpfpModel& model, const KineticState& state,
                                        std::size_t species) {
  return logsobolev_check(state.f.at(species), model.species.at(species),
                          model.maxwellians.at(species), model.grid);
}

/// r = (sqrt f - sqrt(n M~)) / (eps sqrt M~) on the phase grid.
inline PhaseArray remainder_field(const PhaseArray& f, std::span<const double> n,
                                  const MaxwellianTable& table, const PhaseGrid& grid,
                                  double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon", "must be positive");
  PhaseArray r(grid);
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const auto row = f.row(j);
    auto out = r.row(j);
    const double sn = std::sqrt(std::max(n[j], 0.0));
    for (std::size_t k = 0; k < grid.nv(); ++k) {
      const double sm = std::sqrt(table.normalized[k]);
      out[k] = (std::sqrt(std::max(row[k], 0.0)) - sn * sm) / (epsilon * sm);
    }
  }
  return r;
}

/// Weighted norms int r^2 M~, eps int r^2 v^2 M~, sqrt(eps) int r^2 |v| M~.
struct RemainderNorms {
  double l2 = 0.0;
  double v2 = 0.0;
  double v1 = 0.0;
};

inline RemainderNorms remainder_norms(const PhaseArray& r, const MaxwellianTable& table,
                                      const PhaseGrid& grid, double epsilon) {
  CompensatedSum a, b, c;
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const auto row = r.row(j);
    for (std::size_t k = 0; k < grid.nv(); ++k) {
      const double w = row[k] * row[k] * table.normalized[k];
      const double v = grid.v(k);
      a.add(w);
      b.add(w * v * v);
      c.add(w * std::abs(v));
    }
  }
  const double cell = grid.dv() * grid.dx();
  return {a.value() * cell, epsilon * b.value() * cell, std::sqrt(epsilon) * c.value() * cell};
}

/**
 * Cell-centred Fickian flux -c (dn/dx + z n dphi/dx) with centred differences
 * and mirrored ghost cells (the walls are no-flux for both n and phi).
 */
inline std::vector<double> fickian_flux(std::span<const double> n, std::span<const double> phi,
                                        int valence, double coefficient, double dx) {
  const std::size_t nx = n.size();
  std::vector<double> out(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const std::size_t l = j > 0 ? j - 1 : j;
    const std::size_t r = j + 1 < nx ? j + 1 : j;
    const double dn = (n[r] - n[l]) / (2.0 * dx);
    const double dphi = (phi[r] - phi[l]) / (2.0 * dx);
    out[j] = -coefficient * (dn + valence * n[j] * dphi);
  }
  return out;
}

/// Least-squares slope of log(gap) against log(eps).
struct OrderFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS of the log residuals
  std::size_t used = 0;
  std::vector<std::string> warnings;
  bool valid() const noexcept { return used >= 2 && std::isfinite(slope); }
};

inline OrderFit estimate_order(std::span<const double> epsilons, std::span<const double> gaps) {
  OrderFit fit;
  if (epsilons.size() != gaps.size())
    throw InvalidParameter("gaps", "one gap per epsilon required");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i]) || !(epsilons[i] > 0.0)) {
      fit.warnings.push_back("excluded epsilon=" + std::to_string(epsilons[i]) +
                             ": gap " + std::to_string(gaps[i]) + " is not positive");
      continue;
    }
    x.push_back(std::log(epsilons[i]));
    y.push_back(std::log(gaps[i]));
  }
  fit.used = x.size();
  if (x.size() < 3) fit.warnings.push_back("fewer than 3 usable points");
  if (x.size() < 2) return fit;
  const double m = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

/// Bounds that must stay uniform across the epsilon sweep.
struct UniformMonitors {
  double sup_mass = 0.0;
  double sup_second_moment = 0.0;
  double sup_abs_entropy = 0.0;
  double sup_field_energy = 0.0;
  double entropy_production_integral = 0.0;  // int sum_i D^i dt / eps^2
  double boundary_information_integral = 0.0;  // int sum_i I^i dt / eps
};

struct SpeciesSample {
  double mass = 0.0;
  double n_gap = 0.0;      // || n^eps - n^PNP ||_1 against the reference mode
  double n_gap_alt = 0.0;  // same against the other diffusivity mode
  double f_gap = 0.0;      // || f - n M~ ||_1
  InequalitySides ck;
  InequalitySides logsobolev;
  RemainderNorms remainder;
};

struct SweepSample {
  double time = 0.0;
  std::vector<SpeciesSample> species;
  double phi_gap = 0.0;      // || phi^eps - phi^PNP ||_2
  double phi_gap_alt = 0.0;
  double free_energy = 0.0;
};

struct PnpReference {
  DiffusivityMode mode = DiffusivityMode::kappa_over_zeta;
  std::vector<double> times;
  std::vector<std::vector<std::vector<double>>> density;  // [sample][species][cell]
  std::vector<std::vector<double>> potential;              // [sample][cell]
  std::vector<PnpDiagnostics> history;
};

struct EpsilonRun {
  double epsilon = 0.0;
  std::size_t steps = 0;
  std::vector<SweepSample> samples;
  std::vector<DiagnosticsRecord> history;
  DissipationReport dissipation;
  UniformMonitors monitors;
  std::vector<double> sup_n_gap;
  std::vector<double> sup_n_gap_alt;
  std::vector<double> sup_f_gap;
  double sup_phi_gap = 0.0;
  double max_wall_flux = 0.0;
  double max_relative_mass_drift = 0.0;
  double min_ck_residual = std::numeric_limits<double>::infinity();
  double min_logsobolev_residual = std::numeric_limits<double>::infinity();
  /// Time averages over (0, T) of J^eps and of the Fickian flux under each mode.
  std::vector<std::vector<double>> mean_current;
  std::array<std::vector<std::vector<double>>, 2> mean_fickian;
  /// Relative L1 discrepancy sum_i |mean J - mean F| / sum_i |mean F| per mode.
  std::array<double, 2> current_discrepancy{};
};

struct CurrentVerdict {
  std::string verdict;  // "kappa-over-zeta", "one-over-zeta" or "indistinguishable"
  std::array<std::vector<double>, 2> discrepancy;  // per epsilon, indexed by mode
  bool decreasing = false;  // discrepancy of the selected mode decreases as eps shrinks
};

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<double> sample_times;  // includes t = 0
  DiffusivityMode reference_mode = DiffusivityMode::kappa_over_zeta;
  std::array<PnpReference, 2> references;
  std::vector<EpsilonRun> runs;
  std::vector<OrderFit> n_gap_order;  // per species
  std::vector<OrderFit> f_gap_order;  // per species
  OrderFit phi_gap_order;
  CurrentVerdict current;
};

inline std::size_t mode_index(DiffusivityMode m) noexcept {
  return m == DiffusivityMode::kappa_over_zeta ? 0 : 1;
}

inline DiffusivityMode mode_at(std::size_t index) noexcept {
  return index == 0 ? DiffusivityMode::kappa_over_zeta : DiffusivityMode::one_over_zeta;
}

inline PnpReference run_pnp_reference(const RunConfig& config, DiffusivityMode mode,
                                      std::span<const double> times) {
  const PhaseGrid grid = config.make_grid();
  PnpSimulation sim(make_pnp_model(config, mode), initial_densities(config, grid),
                    config.pnp_dt);
  PnpReference ref;
  ref.mode = mode;
  for (double t : times) {
    sim.advance_to(t);
    ref.times.push_back(t);
    ref.density.push_back(sim.state().density);
    ref.potential.push_back(sim.state().field.potential);
  }
  ref.history = sim.history();
  return ref;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b, double dx) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += std::abs(a[j] - b[j]);
  return acc * dx;
}

inline double l2_distance(std::span<const double> a, std::span<const double> b, double dx) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(acc * dx);
}

/// Sample of one VPFP state against the PNP references at the same time.
inline SweepSample sample_state(const VpfpSimulation& sim,
                                const std::array<PnpReference, 2>& refs, std::size_t index,
                                std::size_t primary) {
  const auto& model = sim.model();
  const auto& state = sim.state();
  const auto& g = model.grid;
  const std::size_t alt = 1 - primary;
  SweepSample s;
  s.time = state.time;
  s.free_energy = sim.history().back().free_energy;
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    const auto n = density(state, i);
    const auto& table = model.maxwellians[i];
    SpeciesSample sp;
    sp.mass = total_mass(state.f[i], g);
    sp.n_gap = l1_distance(n, refs[primary].density[index][i], g.dx());
    sp.n_gap_alt = l1_distance(n, refs[alt].density[index][i], g.dx());
    sp.f_gap = maxwellian_gap(state.f[i], n, table, g);
    sp.ck = ck_check(state.f[i], table, g);
    sp.logsobolev = logsobolev_check(state.f[i], model.species[i], table, g);
    const auto r = remainder_field(state.f[i], n, table, g, model.epsilon);
    sp.remainder = remainder_norms(r, table, g, model.epsilon);
    s.species.push_back(sp);
  }
  s.phi_gap = l2_distance(sim.field().potential, refs[primary].potential[index], g.dx());
  s.phi_gap_alt = l2_distance(sim.field().potential, refs[alt].potential[index], g.dx());
  return s;
}

/// Folds the per-step current comparison and the uniform monitors.
class CurrentAccumulator {
 public:
  CurrentAccumulator(const VpfpModel& model)
      : model_(&model),
        current_(model.species_count(), std::vector<double>(model.grid.nx(), 0.0)) {
    for (auto& m : fick_) m = current_;
  }

  void add(const VpfpSimulation& sim, double dt) {
    const auto& g = model_->grid;
    const auto& state = sim.state();
    const auto& phi = sim.field().potential;
    for (std::size_t i = 0; i < state.species_count(); ++i) {
      const auto n = density(state, i);
      const auto j = current(state.f[i], g, model_->epsilon);
      for (std::size_t c = 0; c < g.nx(); ++c) current_[i][c] += dt * j[c];
      for (std::size_t m = 0; m < 2; ++m) {
        const double coef = diffusivity(model_->species[i], mode_at(m));
        const auto f = fickian_flux(n, phi, model_->species[i].valence, coef, g.dx());
        for (std::size_t c = 0; c < g.nx(); ++c) fick_[m][i][c] += dt * f[c];
      }
    }
    total_time_ += dt;
  }

  void finish(EpsilonRun& run) const {
    const double inv = total_time_ > 0.0 ? 1.0 / total_time_ : 0.0;
    run.mean_current = current_;
    for (auto& row : run.mean_current)
      for (double& v : row) v *= inv;
    for (std::size_t m = 0; m < 2; ++m) {
      run.mean_fickian[m] = fick_[m];
      for (auto& row : run.mean_fickian[m])
        for (double& v : row) v *= inv;
      double diff = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < run.mean_current.size(); ++i) {
        diff += l1_distance(run.mean_current[i], run.mean_fickian[m][i], 1.0);
        for (double v : run.mean_fickian[m][i]) norm += std::abs(v);
      }
      run.current_discrepancy[m] = norm > 0.0 ? diff / norm : diff;
    }
  }

 private:
  const VpfpModel* model_;
  std::vector<std::vector<double>> current_;
  std::array<std::vector<std::vector<double>>, 2> fick_;
  double total_time_ = 0.0;
};

inline UniformMonitors uniform_monitors(const VpfpModel& model, const KineticState& state,
                                        const FieldState& field, UniformMonitors m) {
  const auto& g = model.grid;
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    CompensatedSum second, entropy;
    for (std::size_t j = 0; j < g.nx(); ++j) {
      const auto row = state.f[i].row(j);
      for (std::size_t k = 0; k < g.nv(); ++k) {
        second.add(g.v(k) * g.v(k) * row[k]);
        entropy.add(entropy_density(row[k]));
      }
    }
    const double cell = g.dv() * g.dx();
    m.sup_mass = std::max(m.sup_mass, total_mass(state.f[i], g));
    m.sup_second_moment = std::max(m.sup_second_moment, second.value() * cell);
    m.sup_abs_entropy = std::max(m.sup_abs_entropy, std::abs(entropy.value() * cell));
  }
  m.sup_field_energy = std::max(m.sup_field_energy, field_energy(field, g.dx()));
  return m;
}

/// Runs one epsilon of the sweep against precomputed PNP references.
inline EpsilonRun run_epsilon(const RunConfig& config, double epsilon,
                              const std::array<PnpReference, 2>& refs,
                              std::span<const double> times, std::size_t primary) {
  VpfpModel model = make_model(config, epsilon);
  auto initial = well_prepared_state(model, initial_densities(config, model.grid));
  VpfpSimulation sim(std::move(model), std::move(initial));
  const auto& m = sim.model();
  const std::size_t ns = m.species_count();

  EpsilonRun run;
  run.epsilon = epsilon;
  run.sup_n_gap.assign(ns, 0.0);
  run.sup_n_gap_alt.assign(ns, 0.0);
  run.sup_f_gap.assign(ns, 0.0);
  CurrentAccumulator currents(m);
  run.monitors = uniform_monitors(m, sim.state(), sim.field(), run.monitors);

  auto record_sample = [&](std::size_t index) {
    auto s = sample_state(sim, refs, index, primary);
    for (std::size_t i = 0; i < ns; ++i) {
      if (index > 0) {
        run.sup_n_gap[i] = std::max(run.sup_n_gap[i], s.species[i].n_gap);
        run.sup_n_gap_alt[i] = std::max(run.sup_n_gap_alt[i], s.species[i].n_gap_alt);
        run.sup_f_gap[i] = std::max(run.sup_f_gap[i], s.species[i].f_gap);
      }
      run.min_ck_residual = std::min(run.min_ck_residual, s.species[i].ck.residual());
      run.min_logsobolev_residual =
          std::min(run.min_logsobolev_residual, s.species[i].logsobolev.residual());
    }
    if (index > 0) run.sup_phi_gap = std::max(run.sup_phi_gap, s.phi_gap);
    run.samples.push_back(std::move(s));
  };

  record_sample(0);
  for (std::size_t s = 1; s < times.size(); ++s) {
    sim.advance_to(times[s], [&](const VpfpSimulation& current, const StepReport& report) {
      currents.add(current, report.dt);
      run.monitors = uniform_monitors(current.model(), current.state(), current.field(),
                                      run.monitors);
    });
    record_sample(s);
  }

  run.history = sim.history();
  run.steps = run.history.size() - 1;
  run.dissipation = verify_dissipation(run.history, m.species, epsilon);
  currents.finish(run);
  const auto& first = run.history.front();
  for (const auto& r : run.history) {
    for (std::size_t i = 0; i < ns; ++i) {
      run.max_wall_flux = std::max(
          {run.max_wall_flux, std::abs(r.wall_flux[i][0]), std::abs(r.wall_flux[i][1])});
      if (first.mass[i] > 0.0)
        run.max_relative_mass_drift = std::max(
            run.max_relative_mass_drift, std::abs(r.mass[i] - first.mass[i]) / first.mass[i]);
    }
    if (r.dt > 0.0) {
      double d = 0.0, info = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        d += r.entropy_production[i];
        info += r.dg_info[i][0] + r.dg_info[i][1];
      }
      run.monitors.entropy_production_integral += r.dt * d / (epsilon * epsilon);
      run.monitors.boundary_information_integral += r.dt * info / epsilon;
    }
  }
  return run;
}

/// Verdict on the limit-current normalization from the per-epsilon discrepancies.
inline CurrentVerdict limit_current_check(std::span<const EpsilonRun> runs) {
  CurrentVerdict v;
  for (const auto& r : runs) {
    v.discrepancy[0].push_back(r.current_discrepancy[0]);
    v.discrepancy[1].push_back(r.current_discrepancy[1]);
  }
  if (runs.empty()) {
    v.verdict = "indistinguishable";
    return v;
  }
  // runs are ordered by decreasing epsilon; judge at the smallest one
  std::size_t last = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].epsilon < runs[last].epsilon) last = k;
  const double a = v.discrepancy[0][last];
  const double b = v.discrepancy[1][last];
  std::size_t chosen = 0;
  if (std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300})) {
    v.verdict = "indistinguishable";
  } else {
    chosen = a < b ? 0 : 1;
    v.verdict = to_string(mode_at(chosen));
  }
  std::vector<std::size_t> order(runs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return runs[x].epsilon > runs[y].epsilon; });
  v.decreasing = true;
  for (std::size_t k = 1; k < order.size(); ++k)
    v.decreasing = v.decreasing &&
                   v.discrepancy[chosen][order[k]] < v.discrepancy[chosen][order[k - 1]];
  return v;
}

/**
 * Full epsilon sweep: PNP references under both diffusivity modes, then one
 * VPFP run per epsilon from the same well-prepared data, sampled at
 * t = 0, output_interval, ..., final_time.
 */
inline SweepResult sweep_epsilon(const RunConfig& config,
                                 const std::function<void(const std::string&)>& log = {}) {
  validate(config);
  check_config_neutrality(config);
  SweepResult result;
  result.epsilons = config.epsilons;
  result.reference_mode = config.diffusivity;
  result.sample_times.push_back(0.0);
  for (double t : config.sample_times()) result.sample_times.push_back(t);
  for (std::size_t m = 0; m < 2; ++m)
    result.references[m] = run_pnp_reference(config, mode_at(m), result.sample_times);
  const std::size_t primary = mode_index(config.diffusivity);
  for (double eps : config.epsilons) {
    if (log) log("running epsilon = " + std::to_string(eps));
    result.runs.push_back(run_epsilon(config, eps, result.references, result.sample_times,
                                      primary));
  }
  const std::size_t ns = config.species.size();
  std::vector<double> phi;
  for (const auto& r : result.runs) phi.push_back(r.sup_phi_gap);
  for (std::size_t i = 0; i < ns; ++i) {
    std::vector<double> n, f;
    for (const auto& r : result.runs) {
      n.push_back(r.sup_n_gap[i]);
      f.push_back(r.sup_f_gap[i]);
    }
    result.n_gap_order.push_back(estimate_order(result.epsilons, n));
    result.f_gap_order.push_back(estimate_order(result.epsilons, f));
  }
  result.phi_gap_order = estimate_order(result.epsilons, phi);
  result.current = limit_current_check(result.runs);
  return result;
}

}  // namespace vpfp

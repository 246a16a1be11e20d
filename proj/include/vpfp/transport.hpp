#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vpfp/error.hpp"
#include "vpfp/fokker_planck.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/numerics.hpp"

namespace vpfp {

/// Endpoints of [0, L_x]; outward normals are -1 and +1.
enum class Wall { left, right };

enum class ReflectionMode { diffuse, specular, inverse };

inline double outward_normal(Wall wall) noexcept { return wall == Wall::left ? -1.0 : 1.0; }

inline const char* to_string(ReflectionMode mode) noexcept {
  switch (mode) {
    case ReflectionMode::diffuse: return "diffuse";
    case ReflectionMode::specular: return "specular";
    case ReflectionMode::inverse: return "inverse";
  }
  return "unknown";
}

/**
 * Discrete wall measure mu(v) = M(v) |v| dv on the half grid.
 *
 * Index m runs over |v| in ascending order (m = 0 is the slowest cell). Because
 * the velocity grid is mirror symmetric, the same weights serve the outgoing
 * and incoming halves of both walls.
 */
struct WallQuadrature {
  std::vector<double> weights;
  std::vector<double> maxwellian;  // M(v) on the half grid
  double norm = 0.0;               // sum of weights, strictly positive
};

inline WallQuadrature build_wall_quadrature(const MaxwellianTable& table, const PhaseGrid& grid) {
  const std::size_t half = grid.nv() / 2;
  WallQuadrature q;
  q.weights.resize(half);
  q.maxwellian.resize(half);
  CompensatedSum norm;
  for (std::size_t m = 0; m < half; ++m) {
    const std::size_t k = half + m;
    q.maxwellian[m] = table.maxwellian[k];
    q.weights[m] = grid.v(k) * table.maxwellian[k] * grid.dv();
    norm.add(q.weights[m]);
  }
  q.norm = norm.value();
  if (!(q.norm > 0.0)) throw InvalidParameter("wall quadrature", "normalization must be positive");
  return q;
}

/// Velocity index of the m-th slowest outgoing (v.n > 0) cell at a wall.
inline std::size_t outgoing_index(Wall wall, std::size_t m, std::size_t nv) noexcept {
  const std::size_t half = nv / 2;
  return wall == Wall::left ? half - 1 - m : half + m;
}

inline std::size_t incoming_index(Wall wall, std::size_t m, std::size_t nv) noexcept {
  const std::size_t half = nv / 2;
  return wall == Wall::left ? half + m : half - 1 - m;
}

/// Full velocity trace at a wall: outgoing entries are the adjacent cell values,
/// incoming entries come from the reflection law.
struct WallTrace {
  std::vector<double> values;
};

/// Outgoing part sum_{v.n>0} |v.n| f dv of a trace.
inline double outgoing_flux(std::span<const double> trace, Wall wall, const PhaseGrid& grid) {
  const std::size_t nv = grid.nv();
  CompensatedSum acc;
  for (std::size_t m = 0; m < nv / 2; ++m) {
    const std::size_t k = outgoing_index(wall, m, nv);
    acc.add(std::abs(grid.v(k)) * trace[k] * grid.dv());
  }
  return acc.value();
}

/**
 * Maxwell diffuse reflection on a trace: the incoming half is overwritten with
 * M(v) * (outgoing flux) / (discrete normalization), so the discrete net wall flux
 * vanishes for any outgoing data.
 */
inline void apply_diffuse_reflection(std::span<double> trace, Wall wall, const WallQuadrature& wq,
                                     const PhaseGrid& grid) {
  const std::size_t nv = grid.nv();
  const double scale = outgoing_flux(trace, wall, grid) / wq.norm;
  for (std::size_t m = 0; m < nv / 2; ++m) {
    trace[incoming_index(wall, m, nv)] = wq.maxwellian[m] * scale;
  }
}

/// Specular and inverse reflection coincide in one dimension: f(v) = f(-v).
inline void apply_mirror_reflection(std::span<double> trace, Wall wall, const PhaseGrid& grid) {
  const std::size_t nv = grid.nv();
  for (std::size_t m = 0; m < nv / 2; ++m) {
    trace[incoming_index(wall, m, nv)] = trace[outgoing_index(wall, m, nv)];
  }
}

inline void apply_reflection(std::span<double> trace, Wall wall, ReflectionMode mode,
                             const WallQuadrature& wq, const PhaseGrid& grid) {
  if (mode == ReflectionMode::diffuse) {
    apply_diffuse_reflection(trace, wall, wq, grid);
  } else {
    apply_mirror_reflection(trace, wall, grid);
  }
}

/// Trace at a wall built from the adjacent cell, with the reflection law applied.
inline WallTrace boundary_trace(const PhaseArray& f, const PhaseGrid& grid, Wall wall,
                                ReflectionMode mode, const WallQuadrature& wq) {
  const std::size_t j = wall == Wall::left ? 0 : grid.nx() - 1;
  const auto row = f.row(j);
  WallTrace t{std::vector<double>(row.begin(), row.end())};
  apply_reflection(t.values, wall, mode, wq, grid);
  return t;
}

/// Discrete J.n = (1/eps) sum_k (v_k n) trace_k dv.
inline double trace_flux(std::span<const double> trace, Wall wall, const PhaseGrid& grid,
                         double epsilon) {
  const std::size_t half = grid.nv() / 2;
  CompensatedSum acc;
  for (std::size_t m = 0; m < half; ++m) {
    const std::size_t out = outgoing_index(wall, m, grid.nv());
    const std::size_t in = incoming_index(wall, m, grid.nv());
    acc.add(std::abs(grid.v(out)) * trace[out] * grid.dv());
    acc.add(-std::abs(grid.v(in)) * trace[in] * grid.dv());
  }
  return acc.value() / epsilon;
}

/// Net normal flux J.n at a wall after reflection.
inline double wall_flux(const PhaseArray& f, const PhaseGrid& grid, Wall wall, ReflectionMode mode,
                        const WallQuadrature& wq, double epsilon) {
  const auto t = boundary_trace(f, grid, wall, mode, wq);
  return trace_flux(t.values, wall, grid, epsilon);
}

/// Normal flux carried by the outgoing half alone (no re-emission).
inline double outgoing_wall_flux(const PhaseArray& f, const PhaseGrid& grid, Wall wall,
                                 double epsilon) {
  const std::size_t j = wall == Wall::left ? 0 : grid.nx() - 1;
  return outgoing_flux(f.row(j), wall, grid) / epsilon;
}

struct XStepReport {
  double courant = 0.0;
  double wall_outflow = 0.0;  // mass that left through both walls during the step
};

/**
 * First-order upwind update of df/dt + (v/eps) df/dx = 0.
 *
 * Wall faces take the outgoing value from the adjacent cell and the incoming
 * value from the supplied traces.
 */
inline XStepReport transport_x_step(PhaseArray& f, double dt, double epsilon,
                                    const PhaseGrid& grid, const WallTrace& left,
                                    const WallTrace& right) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon", "must be positive");
  XStepReport report;
  report.courant = dt * grid.max_speed() / (epsilon * grid.dx());
  if (report.courant > 1.0 + 1e-12) throw CflViolation("x", report.courant);

  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const double ratio = dt / grid.dx();
  std::vector<double> speed(nv), face(nv), next(nv);
  for (std::size_t k = 0; k < nv; ++k) speed[k] = grid.v(k) / epsilon;

  for (std::size_t k = 0; k < nv; ++k) {
    face[k] = speed[k] * (speed[k] > 0.0 ? left.values[k] : f(0, k));
  }
  CompensatedSum outflow;
  for (std::size_t k = 0; k < nv; ++k) outflow.add(-face[k]);

  for (std::size_t j = 0; j < nx; ++j) {
    const bool last = j + 1 == nx;
    for (std::size_t k = 0; k < nv; ++k) {
      if (speed[k] > 0.0) {
        next[k] = speed[k] * f(j, k);
      } else {
        next[k] = speed[k] * (last ? right.values[k] : f(j + 1, k));
      }
    }
    auto row = f.row(j);
    for (std::size_t k = 0; k < nv; ++k) row[k] -= ratio * (next[k] - face[k]);
    face.swap(next);
  }
  for (std::size_t k = 0; k < nv; ++k) outflow.add(face[k]);
  report.wall_outflow = dt * grid.dv() * outflow.value();
  return report;
}

/**
 * First-order upwind update of df/dt + a df/dv = 0 with a = kappa z E / eps, E = -dphi/dx
 * evaluated at cell centres. Velocity boundary faces carry no flux.
 */
inline double transport_v_step(PhaseArray& f, std::span<const double> field_center, double dt,
                               const SpeciesParams& species, double epsilon,
                               const PhaseGrid& grid) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon", "must be positive");
  const std::size_t nv = grid.nv();
  const double ratio = dt / grid.dv();
  double courant = 0.0;
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const double a = species.kappa * species.valence * field_center[j] / epsilon;
    courant = std::max(courant, std::abs(a) * ratio);
  }
  if (courant > 1.0 + 1e-12) throw CflViolation("v", courant);
  if (species.valence == 0) return courant;

  std::vector<double> flux(nv + 1, 0.0);
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const double a = species.kappa * species.valence * field_center[j] / epsilon;
    if (a == 0.0) continue;
    auto row = f.row(j);
    for (std::size_t k = 1; k < nv; ++k) flux[k] = a * (a > 0.0 ? row[k - 1] : row[k]);
    for (std::size_t k = 0; k < nv; ++k) row[k] -= ratio * (flux[k + 1] - flux[k]);
  }
  return courant;
}

}  // namespace vpfp

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "vpfp/grid.hpp"
#include "vpfp/numerics.hpp"

namespace vpfp {

/**
 * Velocity equilibria of one species on the discrete velocity grid.
 *
 * `normalized` is the unit-mass Gaussian exp(-v^2 / (2 kappa)) rescaled so that
 * its grid sum times dv is 1. `maxwellian` is the wall Maxwellian related to it by
 * normalized = sqrt(kappa / (2 pi)) * maxwellian, i.e. exp(-v^2/(2 kappa)) / kappa
 * in one velocity dimension.
 */
struct MaxwellianTable {
  std::vector<double> normalized;
  std::vector<double> maxwellian;
  /// Grid integral of the continuum unit Gaussian before renormalization.
  double discrete_normalization = 1.0;
};

inline MaxwellianTable build_maxwellians(const SpeciesParams& species, const PhaseGrid& grid) {
  validate(species);
  const double kappa = species.kappa;
  const std::size_t nv = grid.nv();
  MaxwellianTable t;
  t.normalized.resize(nv);
  t.maxwellian.resize(nv);
  const double prefactor = 1.0 / std::sqrt(2.0 * std::numbers::pi * kappa);
  double sum = 0.0;
  for (std::size_t k = 0; k < nv; ++k) {
    const double v = grid.v(k);
    t.normalized[k] = prefactor * std::exp(-v * v / (2.0 * kappa));
    sum += t.normalized[k];
  }
  t.discrete_normalization = sum * grid.dv();
  const double to_wall = std::sqrt(2.0 * std::numbers::pi / kappa);
  for (std::size_t k = 0; k < nv; ++k) {
    t.normalized[k] /= t.discrete_normalization;
    t.maxwellian[k] = t.normalized[k] * to_wall;
  }
  return t;
}

inline std::vector<MaxwellianTable> build_maxwellians(std::span<const SpeciesParams> species,
                                                      const PhaseGrid& grid) {
  std::vector<MaxwellianTable> tables;
  tables.reserve(species.size());
  for (const auto& s : species) tables.push_back(build_maxwellians(s, grid));
  return tables;
}

/**
 * Chang-Cooper discretization of f -> d/dv (v f + kappa df/dv) with zero flux at
 * v = +-V_max.
 *
 * The face flux between cells k and k+1 is
 *   F = (kappa/dv) [B(-w) f_{k+1} - B(w) f_k],  w = v_{k+1/2} dv / kappa,
 * with B the Bernoulli function. Since w = (v_{k+1}^2 - v_k^2) / (2 kappa) on the
 * uniform midpoint grid, the sampled Gaussian exp(-v_k^2/(2 kappa)) has zero flux
 * on every face.
 */
class FokkerPlanckOperator {
 public:
  FokkerPlanckOperator() = default;

  FokkerPlanckOperator(const SpeciesParams& species, const PhaseGrid& grid)
      : kappa_(species.kappa) {
    validate(species);
    const std::size_t nv = grid.nv();
    const double dv = grid.dv();
    up_.resize(nv - 1);
    down_.resize(nv - 1);
    for (std::size_t k = 0; k + 1 < nv; ++k) {
      const double v_face = 0.5 * (grid.v(k) + grid.v(k + 1));
      const double w = v_face * dv / kappa_;
      up_[k] = kappa_ / (dv * dv) * bernoulli(-w);
      down_[k] = kappa_ / (dv * dv) * bernoulli(w);
    }
  }

  std::size_t size() const noexcept { return up_.size() + 1; }
  double kappa() const noexcept { return kappa_; }

  /// Face flux divided by dv between cells k and k+1.
  double face_flux(std::span<const double> f, std::size_t k) const noexcept {
    return up_[k] * f[k + 1] - down_[k] * f[k];
  }

  void apply(std::span<const double> f, std::span<double> out) const noexcept {
    const std::size_t nv = size();
    double left = 0.0;
    for (std::size_t k = 0; k < nv; ++k) {
      const double right = k + 1 < nv ? face_flux(f, k) : 0.0;
      out[k] = right - left;
      left = right;
    }
  }

  /// Backward Euler: solves (I - dt L) f' = f in place.
  void implicit_step(std::span<double> f, double dt, std::vector<double>& work) const {
    const std::size_t nv = size();
    work.resize(5 * nv);
    std::span<double> lower(work.data(), nv);
    std::span<double> diag(work.data() + nv, nv);
    std::span<double> upper(work.data() + 2 * nv, nv);
    std::span<double> rhs(work.data() + 3 * nv, nv);
    std::span<double> sol(work.data() + 4 * nv, nv);
    for (std::size_t k = 0; k < nv; ++k) {
      const double out_right = k + 1 < nv ? down_[k] : 0.0;
      const double out_left = k > 0 ? up_[k - 1] : 0.0;
      diag[k] = 1.0 + dt * (out_right + out_left);
      upper[k] = k + 1 < nv ? -dt * up_[k] : 0.0;
      lower[k] = k > 0 ? -dt * down_[k - 1] : 0.0;
      rhs[k] = f[k];
    }
    solve_tridiagonal(lower, diag, upper, rhs, sol, scratch_);
    for (std::size_t k = 0; k < nv; ++k) f[k] = sol[k];
  }

 private:
  double kappa_ = 1.0;
  std::vector<double> up_;
  std::vector<double> down_;
  mutable std::vector<double> scratch_;
};

/// Discrete L_FP applied row by row.
inline PhaseArray apply_fp(const PhaseArray& f, const SpeciesParams& species,
                           const PhaseGrid& grid) {
  const FokkerPlanckOperator op(species, grid);
  PhaseArray out(grid);
  for (std::size_t j = 0; j < grid.nx(); ++j) op.apply(f.row(j), out.row(j));
  return out;
}

/// Implicit relaxation step with dt_eff = zeta * dt / epsilon^2 on every x-cell.
inline void fp_implicit_step(PhaseArray& f, double dt_eff, const FokkerPlanckOperator& op) {
  if (!(dt_eff > 0.0)) throw InvalidParameter("dt_eff", "must be positive");
  std::vector<double> work;
  for (std::size_t j = 0; j < f.nx(); ++j) {
    try {
      op.implicit_step(f.row(j), dt_eff, work);
    } catch (const SolverFailure& e) {
      throw SolverFailure(std::string("Fokker-Planck solve in x-cell ") + std::to_string(j) +
                              " (" + e.what() + ")",
                          j);
    }
  }
}

inline void fp_implicit_step(PhaseArray& f, double dt_eff, const SpeciesParams& species,
                             const PhaseGrid& grid) {
  fp_implicit_step(f, dt_eff, FokkerPlanckOperator(species, grid));
}

/// L1 residual of the discrete identity L_FP(-v M~) = v M~.
inline double fp_inverse_check(const SpeciesParams& species, const PhaseGrid& grid) {
  const auto table = build_maxwellians(species, grid);
  const FokkerPlanckOperator op(species, grid);
  const std::size_t nv = grid.nv();
  std::vector<double> chi(nv), out(nv);
  for (std::size_t k = 0; k < nv; ++k) chi[k] = -grid.v(k) * table.normalized[k];
  op.apply(chi, out);
  double residual = 0.0;
  for (std::size_t k = 0; k < nv; ++k)
    residual += std::abs(out[k] - grid.v(k) * table.normalized[k]);
  return residual * grid.dv();
}

}  // namespace vpfp

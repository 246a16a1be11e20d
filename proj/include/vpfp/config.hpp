#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vpfp/error.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/transport.hpp"

namespace vpfp {

/// Initial density vocabulary: constant, cosine mode, gaussian bump.
struct DensityProfile {
  enum class Kind { constant, cosine, gaussian };
  Kind kind = Kind::constant;
  double base = 1.0;
  double amplitude = 0.0;
  int mode = 1;          // cosine: base + amplitude cos(mode pi x / L)
  double center = 0.5;   // gaussian: base + amplitude exp(-(x - center)^2 / (2 width^2))
  double width = 0.1;

  double operator()(double x, double length) const {
    switch (kind) {
      case Kind::constant: return base;
      case Kind::cosine:
        return base + amplitude * std::cos(mode * std::numbers::pi * x / length);
      case Kind::gaussian: {
        const double s = (x - center) / width;
        return base + amplitude * std::exp(-0.5 * s * s);
      }
    }
    return base;
  }

  /// Point values at the cell centres.
  std::vector<double> sample(const PhaseGrid& grid) const {
    std::vector<double> n(grid.nx());
    for (std::size_t j = 0; j < grid.nx(); ++j) n[j] = (*this)(grid.x(j), grid.length());
    return n;
  }
};

inline const char* to_string(DensityProfile::Kind kind) noexcept {
  switch (kind) {
    case DensityProfile::Kind::constant: return "constant";
    case DensityProfile::Kind::cosine: return "cosine";
    case DensityProfile::Kind::gaussian: return "gaussian";
  }
  return "unknown";
}

/// Doping / background charge D(x): constant or linear ramp.
struct BackgroundProfile {
  enum class Kind { constant, ramp };
  Kind kind = Kind::constant;
  double value = 0.0;
  double left = 0.0;
  double right = 0.0;

  std::vector<double> sample(const PhaseGrid& grid) const {
    std::vector<double> d(grid.nx(), value);
    if (kind == Kind::ramp) {
      for (std::size_t j = 0; j < grid.nx(); ++j)
        d[j] = left + (right - left) * grid.x(j) / grid.length();
    }
    return d;
  }
};

/// Diffusivity normalization of the limit current: kappa_i / zeta_i or 1 / zeta_i.
enum class DiffusivityMode { kappa_over_zeta, one_over_zeta };

inline const char* to_string(DiffusivityMode mode) noexcept {
  return mode == DiffusivityMode::kappa_over_zeta ? "kappa-over-zeta" : "one-over-zeta";
}

inline double diffusivity(const SpeciesParams& s, DiffusivityMode mode) noexcept {
  return (mode == DiffusivityMode::kappa_over_zeta ? s.kappa : 1.0) / s.zeta;
}

enum class Scaling { low_field, high_field };

struct RunConfig {
  std::vector<double> epsilons{0.25};
  double varpi = 1.0;
  double final_time = 0.5;
  double output_interval = 0.1;
  double cfl = 0.9;
  Scaling scaling = Scaling::low_field;

  std::size_t nx = 64;
  std::size_t nv = 64;
  double length = 1.0;
  std::optional<double> vmax;

  std::vector<SpeciesParams> species;
  std::vector<DensityProfile> initial;
  BackgroundProfile background;

  ReflectionMode reflection = ReflectionMode::diffuse;
  DiffusivityMode diffusivity = DiffusivityMode::kappa_over_zeta;
  double pnp_dt = 1e-4;

  bool sweep_mode() const noexcept { return epsilons.size() > 1; }
  double epsilon() const { return epsilons.at(0); }

  PhaseGrid make_grid() const {
    return PhaseGrid(nx, nv, length, vmax ? *vmax : default_vmax(species));
  }

  /// Output times output_interval, 2 output_interval, ..., final_time.
  std::vector<double> sample_times() const {
    std::vector<double> t;
    const auto count = static_cast<std::size_t>(std::llround(final_time / output_interval));
    for (std::size_t k = 1; k <= count; ++k) {
      t.push_back(k == count ? final_time : static_cast<double>(k) * output_interval);
    }
    if (t.empty() || t.back() < final_time) t.push_back(final_time);
    return t;
  }
};

/// Structural checks shared by every entry point; paths name the offending key.
inline void validate(const RunConfig& c) {
  if (c.epsilons.empty()) throw ConfigError("run.epsilon", "at least one value required");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0))
      throw ConfigError("run.epsilon[" + std::to_string(i) + "]", "must be positive");
  }
  if (!(c.varpi > 0.0)) throw ConfigError("run.varpi", "must be positive");
  if (!(c.final_time > 0.0)) throw ConfigError("run.final_time", "must be positive");
  if (!(c.output_interval > 0.0)) throw ConfigError("run.output_interval", "must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("run.cfl", "must lie in (0, 1]");
  if (!(c.pnp_dt > 0.0)) throw ConfigError("pnp.dt", "must be positive");
  if (c.nx < 2) throw ConfigError("grid.nx", "need at least 2 cells");
  if (c.nv < 2 || c.nv % 2 != 0) throw ConfigError("grid.nv", "must be even and >= 2");
  if (!(c.length > 0.0)) throw ConfigError("grid.length", "must be positive");
  if (c.vmax && !(*c.vmax > 0.0)) throw ConfigError("grid.vmax", "must be positive");
  if (c.species.empty()) throw ConfigError("species", "at least one species required");
  if (c.initial.size() != c.species.size())
    throw ConfigError("species", "every species needs an initial density");
  for (std::size_t i = 0; i < c.species.size(); ++i) {
    const std::string path = "species[" + std::to_string(i) + "]";
    if (!(c.species[i].kappa > 0.0) || !std::isfinite(c.species[i].kappa))
      throw ConfigError(path + ".kappa", "must be positive");
    if (!(c.species[i].zeta > 0.0) || !std::isfinite(c.species[i].zeta))
      throw ConfigError(path + ".zeta", "must be positive");
    if (c.initial[i].kind == DensityProfile::Kind::gaussian && !(c.initial[i].width > 0.0))
      throw ConfigError(path + ".initial.width", "must be positive");
  }
}

/// Initial densities sampled on the grid; negative values are rejected.
inline std::vector<std::vector<double>> initial_densities(const RunConfig& c,
                                                          const PhaseGrid& grid) {
  std::vector<std::vector<double>> n;
  for (std::size_t i = 0; i < c.initial.size(); ++i) {
    n.push_back(c.initial[i].sample(grid));
    if (*std::min_element(n.back().begin(), n.back().end()) < 0.0)
      throw ConfigError("species[" + std::to_string(i) + "].initial", "density must be >= 0");
  }
  return n;
}

inline void check_config_neutrality(const RunConfig& c) {
  const PhaseGrid grid = c.make_grid();
  const auto n = initial_densities(c, grid);
  const auto d = c.background.sample(grid);
  MomentFields m;
  m.density = n;
  const double residual = check_neutrality(m, c.species, d, grid.dx());
  const double scale = charge_scale(n, c.species, d, grid.dx());
  if (std::abs(residual) > 1e-10 * std::max(scale, 1e-300))
    throw ConfigError("species", "initial data are not globally neutral (residual " +
                                     std::to_string(residual) + ")");
}

}  // namespace vpfp

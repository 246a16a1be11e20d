#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vpfp/error.hpp"

namespace vpfp {

/// Per-species dimensionless parameters of the rescaled kinetic system.
struct SpeciesParams {
  int valence = 0;     // z_i
  double kappa = 1.0;  // mass ratio m_ref / m_i
  double zeta = 1.0;   // relaxation ratio tau_ref / tau_i
  std::string label;
};

inline void validate(const SpeciesParams& s, const std::string& path = "species") {
  if (!(s.kappa > 0.0) || !std::isfinite(s.kappa))
    throw InvalidParameter(path + ".kappa", "must be positive and finite");
  if (!(s.zeta > 0.0) || !std::isfinite(s.zeta))
    throw InvalidParameter(path + ".zeta", "must be positive and finite");
}

/**
 * Dimensional reference data for the low-field rescaling.
 *
 * The reference particle carries mass m_ref, unit valence, relaxation time
 * tau_ref and squared thermal velocity theta_ref. Species masses and relaxation
 * times are listed per species.
 */
struct PhysicalScales {
  double m_ref = 1.0;
  double tau_ref = 1.0;
  double theta_ref = 1.0;
  double charge = 1.0;          // elementary charge q
  double permittivity = 1.0;    // epsilon_0
  double thermal_energy = 1.0;  // k_B T_b
  double length = 1.0;          // L
  double concentration = 1.0;   // N_0
  double potential = 1.0;       // Phi_0
  std::vector<double> mass;
  std::vector<double> relaxation_time;
  std::vector<int> valence;
};

struct DimensionlessGroups {
  double epsilon = 0.0;  // scaled mean free path tau_ref V_ref / L
  double nu = 0.0;       // scaled thermal velocity V_ref / U_ref
  double varpi = 0.0;    // epsilon_0 Phi_0 / (q N_0 L^2)
  double v_ref = 0.0;
  double u_ref = 0.0;
  double t0 = 0.0;       // time unit L / U_ref
  std::vector<SpeciesParams> species;
};

inline DimensionlessGroups derive_scales(const PhysicalScales& p) {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidParameter(name, "must be positive");
  };
  positive(p.m_ref, "m_ref");
  positive(p.tau_ref, "tau_ref");
  positive(p.theta_ref, "theta_ref");
  positive(p.charge, "q");
  positive(p.permittivity, "epsilon0");
  positive(p.thermal_energy, "kB_Tb");
  positive(p.length, "L");
  positive(p.concentration, "N0");
  positive(p.potential, "Phi0");
  if (p.mass.size() != p.relaxation_time.size())
    throw InvalidParameter("species", "mass and relaxation_time lists differ in length");
  if (!p.valence.empty() && p.valence.size() != p.mass.size())
    throw InvalidParameter("species", "valence list length differs from mass list");

  DimensionlessGroups g;
  g.v_ref = std::sqrt(p.theta_ref);
  g.u_ref = p.tau_ref * (p.charge / p.m_ref) * (p.potential / p.length);
  g.nu = g.v_ref / g.u_ref;
  g.epsilon = p.tau_ref * g.v_ref / p.length;
  g.varpi = p.permittivity * p.potential / (p.charge * p.concentration * p.length * p.length);
  g.t0 = p.length / g.u_ref;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    positive(p.mass[i], ("m" + idx).c_str());
    positive(p.relaxation_time[i], ("tau" + idx).c_str());
    SpeciesParams s;
    s.kappa = p.m_ref / p.mass[i];
    s.zeta = p.tau_ref / p.relaxation_time[i];
    s.valence = p.valence.empty() ? 0 : p.valence[i];
    s.label = "species" + std::to_string(i);
    g.species.push_back(s);
  }
  return g;
}

/**
 * Uniform cell-centred grid on [0, L_x] x [-V_max, V_max].
 *
 * The velocity grid is mirror-symmetric bit for bit: v[nv-1-k] == -v[k].
 */
class PhaseGrid {
 public:
  PhaseGrid() = default;

  PhaseGrid(std::size_t nx, std::size_t nv, double length, double vmax)
      : nx_(nx), nv_(nv), length_(length), vmax_(vmax) {
    if (nx < 2) throw InvalidParameter("grid.nx", "need at least 2 cells");
    if (nv < 2 || nv % 2 != 0) throw InvalidParameter("grid.nv", "must be even and >= 2");
    if (!(length > 0.0)) throw InvalidParameter("grid.length", "must be positive");
    if (!(vmax > 0.0)) throw InvalidParameter("grid.vmax", "must be positive");
    dx_ = length / static_cast<double>(nx);
    dv_ = 2.0 * vmax / static_cast<double>(nv);
    x_.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) x_[j] = (static_cast<double>(j) + 0.5) * dx_;
    v_.resize(nv);
    const std::size_t half = nv / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const double vk = (static_cast<double>(k) + 0.5) * dv_;
      v_[half + k] = vk;
      v_[half - 1 - k] = -vk;
    }
  }

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nv() const noexcept { return nv_; }
  std::size_t size() const noexcept { return nx_ * nv_; }
  double length() const noexcept { return length_; }
  double vmax() const noexcept { return vmax_; }
  double dx() const noexcept { return dx_; }
  double dv() const noexcept { return dv_; }
  double x(std::size_t j) const noexcept { return x_[j]; }
  double v(std::size_t k) const noexcept { return v_[k]; }
  std::span<const double> x_centers() const noexcept { return x_; }
  std::span<const double> v_centers() const noexcept { return v_; }
  /// Largest |v| among cell centres.
  double max_speed() const noexcept { return v_.back(); }

 private:
  std::size_t nx_ = 0;
  std::size_t nv_ = 0;
  double length_ = 0.0;
  double vmax_ = 0.0;
  double dx_ = 0.0;
  double dv_ = 0.0;
  std::vector<double> x_;
  std::vector<double> v_;
};

/// Default velocity truncation 8 * max_i sqrt(kappa_i).
inline double default_vmax(std::span<const SpeciesParams> species) {
  double kmax = 0.0;
  for (const auto& s : species) kmax = std::max(kmax, s.kappa);
  return 8.0 * std::sqrt(kmax);
}

/// Phase-space array stored x-major: the velocity row of cell j is contiguous.
class PhaseArray {
 public:
  PhaseArray() = default;
  PhaseArray(std::size_t nx, std::size_t nv, double value = 0.0)
      : nx_(nx), nv_(nv), data_(nx * nv, value) {}
  explicit PhaseArray(const PhaseGrid& grid, double value = 0.0)
      : PhaseArray(grid.nx(), grid.nv(), value) {}

  double& operator()(std::size_t j, std::size_t k) noexcept { return data_[j * nv_ + k]; }
  double operator()(std::size_t j, std::size_t k) const noexcept { return data_[j * nv_ + k]; }

  std::span<double> row(std::size_t j) noexcept { return {data_.data() + j * nv_, nv_}; }
  std::span<const double> row(std::size_t j) const noexcept {
    return {data_.data() + j * nv_, nv_};
  }

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nv() const noexcept { return nv_; }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  double min() const noexcept { return *std::min_element(data_.begin(), data_.end()); }

  friend bool operator==(const PhaseArray&, const PhaseArray&) = default;

 private:
  std::size_t nx_ = 0;
  std::size_t nv_ = 0;
  std::vector<double> data_;
};

/// Distribution functions of all species at one time instant.
struct KineticState {
  PhaseGrid grid;
  std::vector<PhaseArray> f;
  double time = 0.0;
  double epsilon = 1.0;

  std::size_t species_count() const noexcept { return f.size(); }
};

struct MomentFields {
  std::vector<std::vector<double>> density;
  std::vector<std::vector<double>> current;
};

/// n(x_j) = sum_k f(x_j, v_k) dv.
inline std::vector<double> density(const PhaseArray& f, const PhaseGrid& grid) {
  std::vector<double> n(grid.nx(), 0.0);
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    double acc = 0.0;
    for (double value : f.row(j)) acc += value;
    n[j] = acc * grid.dv();
  }
  return n;
}

inline std::vector<double> density(const KineticState& state, std::size_t species) {
  return density(state.f.at(species), state.grid);
}

/// J(x_j) = (1/epsilon) sum_k v_k f(x_j, v_k) dv.
inline std::vector<double> current(const PhaseArray& f, const PhaseGrid& grid, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon", "must be positive");
  std::vector<double> j_out(grid.nx(), 0.0);
  const std::size_t nv = grid.nv();
  const std::size_t half = nv / 2;
  for (std::size_t j = 0; j < grid.nx(); ++j) {
    const auto row = f.row(j);
    // pair mirror cells so that even data cancels exactly
    double acc = 0.0;
    for (std::size_t k = 0; k < half; ++k) {
      acc += grid.v(half + k) * (row[half + k] - row[half - 1 - k]);
    }
    j_out[j] = acc * grid.dv() / epsilon;
  }
  return j_out;
}

inline std::vector<double> current(const KineticState& state, std::size_t species,
                                   double epsilon) {
  return current(state.f.at(species), state.grid, epsilon);
}

inline MomentFields moments(const KineticState& state) {
  MomentFields m;
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    m.density.push_back(density(state, i));
    m.current.push_back(current(state, i, state.epsilon));
  }
  return m;
}

/// Discrete sum_i z_i int n_i dx + int D dx.
inline double check_neutrality(const MomentFields& m, std::span<const SpeciesParams> species,
                               std::span<const double> background, double dx) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.density.size(); ++i) {
    double mass = 0.0;
    for (double n : m.density[i]) mass += n;
    total += species[i].valence * mass * dx;
  }
  double bg = 0.0;
  for (double d : background) bg += d;
  return total + bg * dx;
}

inline double check_neutrality(const KineticState& state, std::span<const SpeciesParams> species,
                               std::span<const double> background) {
  MomentFields m;
  for (std::size_t i = 0; i < state.species_count(); ++i) m.density.push_back(density(state, i));
  return check_neutrality(m, species, background, state.grid.dx());
}

/// Scale against which neutrality residuals are judged: sum |z_i| int n_i + int |D|.
inline double charge_scale(const std::vector<std::vector<double>>& densities,
                           std::span<const SpeciesParams> species,
                           std::span<const double> background, double dx) {
  double scale = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    double mass = 0.0;
    for (double n : densities[i]) mass += std::abs(n);
    scale += std::abs(species[i].valence) * mass * dx;
  }
  for (double d : background) scale += std::abs(d) * dx;
  return scale;
}

/// Total mass sum_{j,k} f dx dv.
inline double total_mass(const PhaseArray& f, const PhaseGrid& grid) {
  double acc = 0.0;
  for (double value : f.data()) acc += value;
  return acc * grid.dx() * grid.dv();
}

}  // namespace vpfp

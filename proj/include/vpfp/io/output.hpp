#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "vpfp/config.hpp"
#include "vpfp/error.hpp"
#include "vpfp/limit.hpp"
#include "vpfp/pnp.hpp"
#include "vpfp/version.hpp"
#include "vpfp/vpfp.hpp"

namespace vpfp::io {

using json = nlohmann::ordered_json;

inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error("sha256: cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest.data(), &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha256: digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i)
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

inline json to_json(const DensityProfile& p) {
  json j{{"kind", to_string(p.kind)}, {"base", p.base}};
  if (p.kind == DensityProfile::Kind::cosine) {
    j["amplitude"] = p.amplitude;
    j["mode"] = p.mode;
  } else if (p.kind == DensityProfile::Kind::gaussian) {
    j["amplitude"] = p.amplitude;
    j["center"] = p.center;
    j["width"] = p.width;
  }
  return j;
}

/// Full echo of a configuration with every default filled in.
inline json to_json(const RunConfig& c) {
  json species = json::array();
  for (std::size_t i = 0; i < c.species.size(); ++i) {
    const auto& s = c.species[i];
    species.push_back({{"label", s.label},
                       {"valence", s.valence},
                       {"kappa", s.kappa},
                       {"zeta", s.zeta},
                       {"initial", to_json(c.initial[i])}});
  }
  json background{{"kind", c.background.kind == BackgroundProfile::Kind::ramp ? "ramp"
                                                                               : "constant"}};
  if (c.background.kind == BackgroundProfile::Kind::ramp) {
    background["left"] = c.background.left;
    background["right"] = c.background.right;
  } else {
    background["value"] = c.background.value;
  }
  const PhaseGrid grid = c.make_grid();
  return json{
      {"run",
       {{"epsilon", c.epsilons},
        {"varpi", c.varpi},
        {"final_time", c.final_time},
        {"output_interval", c.output_interval},
        {"cfl", c.cfl},
        {"scaling", c.scaling == Scaling::low_field ? "low-field" : "high-field"}}},
      {"grid",
       {{"nx", c.nx}, {"nv", c.nv}, {"length", c.length}, {"vmax", grid.vmax()},
        {"dx", grid.dx()}, {"dv", grid.dv()}}},
      {"species", species},
      {"background", background},
      {"boundary", {{"mode", to_string(c.reflection)}}},
      {"pnp", {{"dt", c.pnp_dt}, {"diffusivity", to_string(c.diffusivity)}}}};
}

/// Writes rows with 17 significant digits so reruns can be compared byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << values, first = false), ...);
    out_ << '\n';
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Output directory that remembers every file written, for the manifest inventory.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  std::filesystem::path file(const std::string& name) {
    inventory_.push_back(name);
    return root_ / name;
  }

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::vector<std::string>& inventory() const noexcept { return inventory_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> inventory_;
};

inline const std::vector<std::string>& diagnostics_header() {
  static const std::vector<std::string> h{
      "step", "t", "dt", "species", "mass", "free_energy", "field_energy",
      "entropy_production", "dg_info_left", "dg_info_right", "wall_flux_left",
      "wall_flux_right", "neutrality", "min_f", "ck_lhs", "ck_rhs", "relative_entropy",
      "logsobolev_bound"};
  return h;
}

/// Per-step CK / log-Sobolev sides alongside a VPFP history (one entry per record).
struct InequalityTrace {
  std::vector<std::vector<InequalitySides>> ck;
  std::vector<std::vector<InequalitySides>> logsobolev;

  void add(const VpfpModel& model, const KineticState& state) {
    std::vector<InequalitySides> a, b;
    for (std::size_t i = 0; i < state.species_count(); ++i) {
      a.push_back(ck_check(model, state, i));
      b.push_back(logsobolev_check(model, state, i));
    }
    ck.push_back(std::move(a));
    logsobolev.push_back(std::move(b));
  }
};

inline void write_diagnostics(const std::filesystem::path& path, const VpfpModel& model,
                              const std::vector<DiagnosticsRecord>& history,
                              const InequalityTrace& inequalities) {
  CsvWriter csv(path, diagnostics_header());
  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto& r = history[n];
    for (std::size_t i = 0; i < r.mass.size(); ++i) {
      const auto& ck = inequalities.ck.at(n).at(i);
      const auto& ls = inequalities.logsobolev.at(n).at(i);
      csv.row(n, r.time, r.dt, model.species[i].label, r.mass[i], r.free_energy, r.field_energy,
              r.entropy_production[i], r.dg_info[i][0], r.dg_info[i][1], r.wall_flux[i][0],
              r.wall_flux[i][1], r.neutrality, r.min_f, ck.lhs, ck.rhs, ls.lhs, ls.rhs);
    }
  }
}

/// Density, current and potential profiles at one output time.
inline void write_profiles(CsvWriter& csv, const VpfpModel& model, const KineticState& state,
                           const FieldState& field) {
  for (std::size_t i = 0; i < state.species_count(); ++i) {
    const auto n = density(state, i);
    const auto j = current(state, i, model.epsilon);
    for (std::size_t c = 0; c < model.grid.nx(); ++c)
      csv.row(state.time, model.species[i].label, model.grid.x(c), n[c], j[c],
              field.potential[c]);
  }
}

inline void write_pnp_diagnostics(const std::filesystem::path& path, const PnpModel& model,
                                  const std::vector<PnpDiagnostics>& history) {
  CsvWriter csv(path, {"step", "t", "species", "mass", "energy", "field_energy", "dissipation",
                       "gummel_iterations"});
  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto& d = history[n];
    for (std::size_t i = 0; i < d.mass.size(); ++i)
      csv.row(n, d.time, model.species[i].label, d.mass[i], d.energy, d.field_energy,
              d.dissipation, d.gummel_iterations);
  }
}

inline void write_sweep(OutputDir& dir, const RunConfig& config, const SweepResult& result) {
  const auto& labels = config.species;
  {
    CsvWriter csv(dir.file("sweep_samples.csv"),
                  {"epsilon", "t", "species", "mass", "n_gap", "n_gap_alt", "f_gap", "phi_gap",
                   "phi_gap_alt", "ck_lhs", "ck_rhs", "relative_entropy", "logsobolev_bound",
                   "remainder_l2", "remainder_v2", "remainder_v1", "free_energy"});
    for (const auto& run : result.runs)
      for (const auto& s : run.samples)
        for (std::size_t i = 0; i < s.species.size(); ++i) {
          const auto& sp = s.species[i];
          csv.row(run.epsilon, s.time, labels[i].label, sp.mass, sp.n_gap, sp.n_gap_alt,
                  sp.f_gap, s.phi_gap, s.phi_gap_alt, sp.ck.lhs, sp.ck.rhs, sp.logsobolev.lhs,
                  sp.logsobolev.rhs, sp.remainder.l2, sp.remainder.v2, sp.remainder.v1,
                  s.free_energy);
        }
  }
  {
    CsvWriter csv(dir.file("sweep_summary.csv"),
                  {"epsilon", "species", "steps", "sup_n_gap", "sup_n_gap_alt", "sup_f_gap",
                   "sup_phi_gap", "current_discrepancy_kappa_over_zeta",
                   "current_discrepancy_one_over_zeta", "min_ck_residual",
                   "min_logsobolev_residual", "max_wall_flux", "max_relative_mass_drift",
                   "dissipation_worst_slack", "dissipation_worst_step_increase",
                   "dissipation_passed", "sup_mass", "sup_second_moment", "sup_abs_entropy",
                   "sup_field_energy", "entropy_production_integral",
                   "boundary_information_integral"});
    for (const auto& run : result.runs)
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& m = run.monitors;
        csv.row(run.epsilon, labels[i].label, run.steps, run.sup_n_gap[i], run.sup_n_gap_alt[i],
                run.sup_f_gap[i], run.sup_phi_gap, run.current_discrepancy[0],
                run.current_discrepancy[1], run.min_ck_residual, run.min_logsobolev_residual,
                run.max_wall_flux, run.max_relative_mass_drift, run.dissipation.worst_slack,
                run.dissipation.worst_step_increase, run.dissipation.passed ? 1 : 0, m.sup_mass,
                m.sup_second_moment, m.sup_abs_entropy, m.sup_field_energy,
                m.entropy_production_integral, m.boundary_information_integral);
      }
  }
  {
    CsvWriter csv(dir.file("sweep_diagnostics.csv"),
                  {"epsilon", "step", "t", "dt", "species", "mass", "free_energy",
                   "entropy_production", "dg_info_left", "dg_info_right", "wall_flux_left",
                   "wall_flux_right", "min_f"});
    for (const auto& run : result.runs)
      for (std::size_t n = 0; n < run.history.size(); ++n) {
        const auto& r = run.history[n];
        for (std::size_t i = 0; i < r.mass.size(); ++i)
          csv.row(run.epsilon, n, r.time, r.dt, labels[i].label, r.mass[i], r.free_energy,
                  r.entropy_production[i], r.dg_info[i][0], r.dg_info[i][1], r.wall_flux[i][0],
                  r.wall_flux[i][1], r.min_f);
      }
  }
  {
    CsvWriter csv(dir.file("sweep_currents.csv"),
                  {"epsilon", "species", "x", "mean_current", "fickian_kappa_over_zeta",
                   "fickian_one_over_zeta"});
    const PhaseGrid grid = config.make_grid();
    for (const auto& run : result.runs)
      for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t c = 0; c < grid.nx(); ++c)
          csv.row(run.epsilon, labels[i].label, grid.x(c), run.mean_current[i][c],
                  run.mean_fickian[0][i][c], run.mean_fickian[1][i][c]);
  }
  {
    CsvWriter csv(dir.file("pnp_reference.csv"),
                  {"mode", "t", "species", "x", "density", "potential"});
    const PhaseGrid grid = config.make_grid();
    for (const auto& ref : result.references)
      for (std::size_t s = 0; s < ref.times.size(); ++s)
        for (std::size_t i = 0; i < labels.size(); ++i)
          for (std::size_t c = 0; c < grid.nx(); ++c)
            csv.row(to_string(ref.mode), ref.times[s], labels[i].label, grid.x(c),
                    ref.density[s][i][c], ref.potential[s][c]);
  }
}

inline json to_json(const OrderFit& f) {
  json j{{"slope", f.valid() ? json(f.slope) : json(nullptr)},
         {"intercept", f.valid() ? json(f.intercept) : json(nullptr)},
         {"residual", f.valid() ? json(f.residual) : json(nullptr)},
         {"points_used", f.used},
         {"warnings", f.warnings}};
  return j;
}

inline json sweep_summary_json(const RunConfig& config, const SweepResult& r) {
  json orders = json::object();
  for (std::size_t i = 0; i < config.species.size(); ++i) {
    orders[config.species[i].label] = {{"n_gap", to_json(r.n_gap_order[i])},
                                       {"f_gap", to_json(r.f_gap_order[i])}};
  }
  orders["phi_gap"] = to_json(r.phi_gap_order);
  json current{{"verdict", r.current.verdict},
               {"reference_mode", to_string(r.reference_mode)},
               {"discrepancy_kappa_over_zeta", r.current.discrepancy[0]},
               {"discrepancy_one_over_zeta", r.current.discrepancy[1]},
               {"selected_mode_decreasing", r.current.decreasing}};
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"epsilon", run.epsilon},
                    {"steps", run.steps},
                    {"sup_n_gap", run.sup_n_gap},
                    {"sup_f_gap", run.sup_f_gap},
                    {"sup_phi_gap", run.sup_phi_gap},
                    {"dissipation_passed", run.dissipation.passed},
                    {"dissipation_worst_slack", run.dissipation.worst_slack},
                    {"min_ck_residual", run.min_ck_residual},
                    {"min_logsobolev_residual", run.min_logsobolev_residual},
                    {"max_wall_flux", run.max_wall_flux}});
  }
  return json{{"epsilons", r.epsilons},
              {"sample_times", r.sample_times},
              {"orders", orders},
              {"diffusivity", current},
              {"runs", runs}};
}

/// Tolerances and scheme choices recorded in every manifest.
inline json scheme_json() {
  return json{
      {"splitting_order", kSplittingOrder},
      {"x_transport", "first-order upwind, wall faces from reflected traces"},
      {"v_transport", "first-order upwind, zero flux at +-V_max"},
      {"collision", "Chang-Cooper, backward Euler, dt_eff = zeta dt / eps^2"},
      {"poisson", "Neumann, zero-mean potential, two bidiagonal sweeps"},
      {"pnp", "Scharfetter-Gummel fluxes, backward Euler with Gummel iteration"},
      {"entropy_production",
       "4 kappa^2 sum over velocity faces of mean(M~) ((h_{k+1}-h_k)/dv)^2, h = sqrt(f/M~)"},
      {"logsobolev_bound", "D / (2 kappa)"},
      {"tolerances",
       {{"neutrality_relative", kNeutralityTolerance},
        {"dissipation_step_relative", kDissipationStepTolerance},
        {"dg_information_floor", -kInformationTolerance},
        {"ck_residual", -kCkTolerance},
        {"logsobolev_residual", -kLogSobolevTolerance},
        {"wall_flux", 1e-14},
        {"pnp_energy_step", 1e-8}}}};
}

struct ManifestInfo {
  std::string subcommand;
  std::string config_path;
  std::string config_text;
  double wall_seconds = 0.0;
  json results = json::object();
  std::vector<std::string> violations;
};

/// `config` may be null for subcommands that run without one.
inline void write_manifest(OutputDir& dir, const RunConfig* config, const ManifestInfo& info) {
  const auto path = dir.file("manifest.json");
  const json echo = config ? to_json(*config) : json(nullptr);
  json m{{"tool", "vpfp-lab"},
         {"version", kVersion},
         {"subcommand", info.subcommand},
         {"config_path", info.config_path},
         {"config_sha256", sha256_hex(info.config_text)},
         {"config_echo_sha256", sha256_hex(echo.dump())},
         {"config", echo},
         {"scheme", scheme_json()},
         {"wall_clock_seconds", info.wall_seconds},
         {"results", info.results},
         {"violations", info.violations},
         {"files", dir.inventory()}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << m.dump(2) << '\n';
}

/// matplotlib script for the files of one output directory.
inline void write_plot_script(OutputDir& dir, const std::string& subcommand) {
  std::ofstream out(dir.file("plot.py"));
  out << R"(#!/usr/bin/env python3
"""Plots for a vpfp_lab output directory. Usage: python3 plot.py [DIR]"""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

root = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))


def rows(name):
    with open(os.path.join(root, name)) as fh:
        return list(csv.DictReader(fh))


def energy_vs_time(name, key, out):
    series = defaultdict(list)
    for r in rows(name):
        tag = r.get("epsilon", "")
        series[tag].append((float(r["t"]), float(r[key])))
    fig, ax = plt.subplots()
    for tag, pts in sorted(series.items()):
        pts = sorted(set(pts))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"eps={tag}" if tag else key)
    ax.set_xlabel("t")
    ax.set_ylabel(key)
    ax.legend()
    fig.savefig(os.path.join(root, out), dpi=120)


def gaps_vs_eps(out):
    data = defaultdict(list)
    for r in rows("sweep_summary.csv"):
        data[r["species"]].append((float(r["epsilon"]), float(r["sup_n_gap"]), float(r["sup_f_gap"])))
    fig, ax = plt.subplots()
    for sp, pts in data.items():
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"|n - n_PNP|_1 {sp}")
        ax.loglog([p[0] for p in pts], [p[2] for p in pts], "s--", label=f"|f - nM|_1 {sp}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("sup over samples")
    ax.legend()
    fig.savefig(os.path.join(root, out), dpi=120)


)";
  if (subcommand == "vpfp") {
    out << "energy_vs_time(\"diagnostics.csv\", \"free_energy\", \"energy.png\")\n";
  } else if (subcommand == "pnp") {
    out << "energy_vs_time(\"pnp_diagnostics.csv\", \"energy\", \"energy.png\")\n";
  } else if (subcommand == "sweep") {
    out << "gaps_vs_eps(\"gaps.png\")\n";
    out << "energy_vs_time(\"sweep_diagnostics.csv\", \"free_energy\", \"energy.png\")\n";
  }
}

}  // namespace vpfp::io

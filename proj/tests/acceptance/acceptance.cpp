// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vpfp/checks.hpp"
#include "vpfp/io/config_loader.hpp"
#include "vpfp/io/output.hpp"
#include "vpfp/limit.hpp"
#include "vpfp/pnp.hpp"
#include "vpfp/vpfp.hpp"

namespace {

namespace fs = std::filesystem;
using namespace vpfp;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string config_path(const std::string& name) {
  return std::string(VPFP_CONFIG_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int failures = 0;

void report(int id, bool passed, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, passed ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!passed) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct SweepRun {
  std::string name;
  RunConfig config;
  std::string text;
  SweepResult result;
  double seconds = 0.0;
};

SweepRun run_sweep(const std::string& name) {
  SweepRun s;
  s.name = name;
  s.text = io::read_text_file(config_path(name));
  s.config = io::parse_config(s.text);
  const auto start = Clock::now();
  s.result = sweep_epsilon(s.config);
  s.seconds = seconds_since(start);
  return s;
}

fs::path write_sweep_outputs(const SweepRun& s, const fs::path& dir_path) {
  fs::remove_all(dir_path);
  io::OutputDir dir(dir_path);
  io::write_sweep(dir, s.config, s.result);
  io::ManifestInfo info;
  info.subcommand = "sweep";
  info.config_path = config_path(s.name);
  info.config_text = s.text;
  info.results = io::sweep_summary_json(s.config, s.result);
  info.wall_seconds = s.seconds;
  io::write_manifest(dir, &s.config, info);
  return dir_path;
}

void operator_identities() {
  const auto start = Clock::now();
  SpeciesParams unit;
  double nullspace = 0.0;
  for (double kappa : {0.5, 1.0, 2.0}) {
    SpeciesParams s;
    s.kappa = kappa;
    nullspace = std::max(nullspace,
                         maxwellian_nullspace_residual(s, PhaseGrid(4, 64, 1.0, 8.0 * std::sqrt(kappa))));
  }
  std::vector<double> res;
  for (std::size_t nv : {32, 64, 128}) res.push_back(fp_inverse_check(unit, PhaseGrid(4, nv, 1.0, 8.0)));
  const double r1 = res[0] / res[1], r2 = res[1] / res[2];
  const double secs = seconds_since(start);
  const bool ok = nullspace <= 1e-12 && std::abs(r1 - 4.0) <= 0.3 && std::abs(r2 - 4.0) <= 0.3 &&
                  secs < 1.0;
  report(1, ok,
         fmt("max|L_FP(M)|=%.2e", nullspace) + fmt(" inverse ratios %.3f", r1) + fmt(", %.3f", r2) +
             fmt(" (%.3f s)", secs));
}

void poisson_manufactured() {
  const auto start = Clock::now();
  const double e64 = poisson_manufactured_error(64);
  double lo = 1e300, hi = 0.0;
  double prev = poisson_manufactured_error(32);
  for (std::size_t nx : {64, 128, 256}) {
    const double e = poisson_manufactured_error(nx);
    lo = std::min(lo, prev / e);
    hi = std::max(hi, prev / e);
    prev = e;
  }
  const double secs = seconds_since(start);
  report(2, e64 <= 1.5e-3 && lo >= 3.7 && hi <= 4.3 && secs < 1.0,
         fmt("e(64)=%.3e", e64) + fmt(" ratios in [%.4f", lo) + fmt(", %.4f]", hi) +
             fmt(" (%.3f s)", secs));
}

void equilibrium_stationarity(const RunConfig& acceptance) {
  auto config = acceptance;
  for (auto& p : config.initial) p = DensityProfile{};
  const double eps = *std::min_element(config.epsilons.begin(), config.epsilons.end());
  auto model = make_model(config, eps);
  VpfpSimulation sim(model, well_prepared_state(model, initial_densities(config, model.grid)));
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const auto before = sim.state().f;
    sim.step(sim.stable_dt());
    for (std::size_t i = 0; i < before.size(); ++i) {
      const auto& a = before[i].data();
      const auto& b = sim.state().f[i].data();
      for (std::size_t q = 0; q < a.size(); ++q) worst = std::max(worst, std::abs(a[q] - b[q]));
    }
  }
  double drift = 0.0;
  const auto& h = sim.history();
  for (const auto& r : h)
    for (std::size_t i = 0; i < r.mass.size(); ++i)
      drift = std::max(drift, std::abs(r.mass[i] - h.front().mass[i]) / h.front().mass[i]);
  report(3, worst <= 1e-10 && drift <= 1e-12,
         fmt("max per-step change %.2e", worst) + fmt(", relative mass drift %.2e", drift) +
             " over 1000 steps");
}

void dissipation(const SweepRun& sweep, const SweepRun& companion) {
  bool ok = true;
  double worst_rel = -1e300, min_d = 1e300, min_i = 1e300;
  for (const SweepRun* s : {&sweep, &companion}) {
    for (const auto& run : s->result.runs) {
      const auto& rep = run.dissipation;
      ok = ok && rep.passed && rep.worst_step_increase <= 1e-6 * std::abs(rep.energy0) &&
           rep.min_entropy_production >= 0.0 && rep.min_dg_info >= 0.0;
      worst_rel = std::max(worst_rel, rep.worst_step_increase / std::abs(rep.energy0));
      min_d = std::min(min_d, rep.min_entropy_production);
      min_i = std::min(min_i, rep.min_dg_info);
    }
  }
  report(4, ok,
         fmt("worst step increase %.2e |E0|", worst_rel) + fmt(", min D %.2e", min_d) +
             fmt(", min I %.2e", min_i) + " (acceptance and companion sweeps)");
}

void wall_flux(const SweepRun& sweep, const SweepRun& companion) {
  double worst = 0.0;
  for (const SweepRun* s : {&sweep, &companion})
    for (const auto& run : s->result.runs)
      for (const auto& r : run.history)
        for (const auto& w : r.wall_flux) worst = std::max({worst, std::abs(w[0]), std::abs(w[1])});
  report(5, worst <= 1e-14, fmt("max |J.n| %.2e at every step of every run", worst));
}

void inequalities(const SweepRun& sweep, const SweepRun& companion) {
  double ck = 1e300, ls = 1e300;
  for (const SweepRun* s : {&sweep, &companion})
    for (const auto& run : s->result.runs) {
      ck = std::min(ck, run.min_ck_residual);
      ls = std::min(ls, run.min_logsobolev_residual);
    }
  report(6, ck >= -1e-8 && ls >= -1e-8,
         fmt("min CK residual %.3e", ck) + fmt(", min log-Sobolev residual %.3e", ls));
}

void diffusion_limit(const SweepRun& sweep) {
  const auto& r = sweep.result;
  std::vector<std::size_t> order(r.runs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return r.runs[a].epsilon > r.runs[b].epsilon; });
  bool ok = sweep.seconds <= 600.0;
  std::string detail;
  for (std::size_t i = 0; i < sweep.config.species.size(); ++i) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      ok = ok && r.runs[order[k]].sup_n_gap[i] < r.runs[order[k - 1]].sup_n_gap[i];
      ok = ok && r.runs[order[k]].sup_f_gap[i] < r.runs[order[k - 1]].sup_f_gap[i];
    }
    ok = ok && r.n_gap_order[i].slope >= 0.8;
    detail += sweep.config.species[i].label + ": n-gap";
    for (std::size_t k : order) detail += fmt(" %.2e", r.runs[k].sup_n_gap[i]);
    detail += fmt(" order %.2f", r.n_gap_order[i].slope);
    detail += " f-gap";
    for (std::size_t k : order) detail += fmt(" %.2e", r.runs[k].sup_f_gap[i]);
    detail += "; ";
  }
  report(7, ok, detail + fmt("runtime %.1f s", sweep.seconds));
}

void pnp_energy(const SweepRun& sweep, const SweepRun& companion) {
  double worst = -1e300;
  for (const SweepRun* s : {&sweep, &companion})
    for (const auto& ref : s->result.references)
      worst = std::max(worst, pnp_worst_energy_increase(ref.history));

  auto config = io::load_config(config_path("heat_mode.yaml"));
  double heat_err = 0.0;
  for (double zeta : {1.0, 2.0}) {
    config.species[0].zeta = zeta;
    const auto model = make_pnp_model(config, config.diffusivity);
    const PhaseGrid grid = config.make_grid();
    const auto n0 = initial_densities(config, grid);
    PnpSimulation sim(model, n0, config.pnp_dt);
    sim.advance_to(0.1);
    worst = std::max(worst, pnp_worst_energy_increase(sim.history()));
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t j = 0; j < grid.nx(); ++j) {
      const double c = std::cos(std::numbers::pi * grid.x(j) / grid.length());
      a0 += (n0[0][j] - 1.0) * c;
      a1 += (sim.state().density[0][j] - 1.0) * c;
    }
    const double exact = std::exp(-std::numbers::pi * std::numbers::pi * 0.1 / zeta);
    heat_err = std::max(heat_err, std::abs(a1 / a0 / exact - 1.0));
  }
  report(8, worst <= 1e-8 && heat_err <= 0.01,
         fmt("worst PNP energy increase %.2e", worst) +
             fmt(", heat-mode relative error %.2e (zeta = 1, 2; Nx = 128, t = 0.1)", heat_err));
}

void current_verdict(const SweepRun& sweep, const SweepRun& companion, const fs::path& out) {
  bool ok = true;
  std::string detail;
  for (const SweepRun* s : {&sweep, &companion}) {
    const auto dir = write_sweep_outputs(*s, out / (s == &sweep ? "verdict_acceptance" : "verdict_companion"));
    const auto manifest = io::json::parse(slurp(dir / "manifest.json"));
    const auto& cur = manifest["results"]["diffusivity"];
    const std::string verdict = cur["verdict"].get<std::string>();
    const bool decreasing = cur["selected_mode_decreasing"].get<bool>();
    ok = ok && verdict == s->result.current.verdict && decreasing;
    // distinct kappa values must separate the two normalizations
    if (s == &companion) ok = ok && verdict != "indistinguishable";
    detail += (s == &sweep ? "acceptance: " : "companion: ") + verdict;
    const auto& k = cur["discrepancy_kappa_over_zeta"];
    const auto& o = cur["discrepancy_one_over_zeta"];
    detail += " kappa/zeta";
    for (const auto& v : k) detail += fmt(" %.3e", v.get<double>());
    detail += " 1/zeta";
    for (const auto& v : o) detail += fmt(" %.3e", v.get<double>());
    detail += decreasing ? " decreasing; " : " not decreasing; ";
  }
  report(9, ok, detail);
}

void determinism(const SweepRun& sweep, const fs::path& out) {
  const auto a = write_sweep_outputs(sweep, out / "determinism_a");
  const auto repeat = run_sweep("acceptance.yaml");
  const auto b = write_sweep_outputs(repeat, out / "determinism_b");
  bool ok = true;
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    const auto other = b / entry.path().filename();
    ok = ok && fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  report(10, ok && compared > 0,
         std::to_string(compared) + " CSV files compared byte for byte across two runs");
}

}  // namespace

int main() {
  const fs::path out = VPFP_SCRATCH_DIR;
  fs::create_directories(out);
  try {
    operator_identities();
    poisson_manufactured();
    const auto sweep = run_sweep("acceptance.yaml");
    equilibrium_stationarity(sweep.config);
    const auto companion = run_sweep("companion_kappa.yaml");
    dissipation(sweep, companion);
    wall_flux(sweep, companion);
    inequalities(sweep, companion);
    diffusion_limit(sweep);
    pnp_energy(sweep, companion);
    current_verdict(sweep, companion, out);
    determinism(sweep, out);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

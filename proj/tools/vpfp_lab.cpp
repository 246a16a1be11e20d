// Command-line front end: vpfp, pnp, sweep and checks subcommands.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vpfp/io/config_loader.hpp"
#include "vpfp/io/output.hpp"
#include "vpfp/vpfp_lab.hpp"

namespace {

using vpfp::io::json;

struct Options {
  std::string config_path;
  std::string out_dir = "vpfp_out";
  bool strict = false;
  std::string mode;
  std::string diffusivity;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

vpfp::RunConfig load(const Options& o, std::string& text) {
  if (o.config_path.empty()) throw vpfp::ConfigError("--config", "required for this subcommand");
  text = vpfp::io::read_text_file(o.config_path);
  auto c = vpfp::io::parse_config(text);
  if (!o.mode.empty()) c.reflection = vpfp::io::parse_reflection(o.mode);
  if (!o.diffusivity.empty()) c.diffusivity = vpfp::io::parse_diffusivity(o.diffusivity);
  return c;
}

int finish(const Options& o, const std::vector<std::string>& violations) {
  for (const auto& v : violations) std::cerr << "violation: " << v << '\n';
  if (!violations.empty() && o.strict) return 3;
  return 0;
}

int run_vpfp(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  std::string text;
  const auto config = load(o, text);
  if (config.sweep_mode())
    std::cerr << "note: epsilon list given; the vpfp subcommand uses the first value\n";
  vpfp::io::OutputDir dir(o.out_dir);
  auto model = vpfp::make_model(config, config.epsilon());
  auto initial = vpfp::well_prepared_state(model, vpfp::initial_densities(config, model.grid));
  vpfp::VpfpSimulation sim(std::move(model), std::move(initial));

  vpfp::io::InequalityTrace inequalities;
  inequalities.add(sim.model(), sim.state());
  vpfp::io::CsvWriter profiles(dir.file("profiles.csv"),
                               {"t", "species", "x", "density", "current", "potential"});
  vpfp::io::write_profiles(profiles, sim.model(), sim.state(), sim.field());
  for (double t : config.sample_times()) {
    sim.advance_to(t, [&](const vpfp::VpfpSimulation& s, const vpfp::StepReport&) {
      inequalities.add(s.model(), s.state());
    });
    vpfp::io::write_profiles(profiles, sim.model(), sim.state(), sim.field());
  }
  vpfp::io::write_diagnostics(dir.file("diagnostics.csv"), sim.model(), sim.history(),
                              inequalities);

  const auto& history = sim.history();
  const auto report = vpfp::verify_dissipation(history, sim.model().species, config.epsilon());
  std::vector<std::string> violations = report.violations;
  double max_flux = 0.0, drift = 0.0, min_f = 0.0, min_ck = 1e300, min_ls = 1e300;
  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto& r = history[n];
    min_f = std::min(min_f, r.min_f);
    for (std::size_t i = 0; i < r.mass.size(); ++i) {
      max_flux = std::max({max_flux, std::abs(r.wall_flux[i][0]), std::abs(r.wall_flux[i][1])});
      const double m0 = history.front().mass[i];
      if (m0 > 0.0) drift = std::max(drift, std::abs(r.mass[i] - m0) / m0);
      min_ck = std::min(min_ck, inequalities.ck[n][i].residual());
      min_ls = std::min(min_ls, inequalities.logsobolev[n][i].residual());
    }
  }
  const double steps = static_cast<double>(history.size() - 1);
  if (max_flux > 1e-14) violations.push_back("wall flux " + std::to_string(max_flux));
  if (drift > 1e-12 * std::max(steps, 1.0))
    violations.push_back("mass drift " + std::to_string(drift));
  if (min_f < 0.0) violations.push_back("negative distribution value");
  if (min_ck < -vpfp::kCkTolerance) violations.push_back("Csiszar-Kullback residual negative");
  if (min_ls < -vpfp::kLogSobolevTolerance)
    violations.push_back("log-Sobolev residual negative");

  vpfp::io::write_plot_script(dir, "vpfp");
  vpfp::io::ManifestInfo info;
  info.subcommand = "vpfp";
  info.config_path = o.config_path;
  info.config_text = text;
  info.violations = violations;
  info.results = json{{"steps", history.size() - 1},
                      {"final_time", sim.time()},
                      {"initial_free_energy", history.front().free_energy},
                      {"final_free_energy", history.back().free_energy},
                      {"dissipation_passed", report.passed},
                      {"dissipation_worst_slack", report.worst_slack},
                      {"dissipation_worst_step_increase", report.worst_step_increase},
                      {"max_wall_flux", max_flux},
                      {"max_relative_mass_drift", drift},
                      {"min_ck_residual", min_ck},
                      {"min_logsobolev_residual", min_ls}};
  info.wall_seconds = seconds_since(start);
  vpfp::io::write_manifest(dir, &config, info);
  std::cout << "vpfp: " << history.size() - 1 << " steps to t=" << sim.time()
            << ", E(0)=" << history.front().free_energy
            << ", E(T)=" << history.back().free_energy << ", outputs in " << o.out_dir << '\n';
  return finish(o, violations);
}

int run_pnp(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  std::string text;
  const auto config = load(o, text);
  vpfp::io::OutputDir dir(o.out_dir);
  const vpfp::PhaseGrid grid = config.make_grid();
  vpfp::PnpSimulation sim(vpfp::make_pnp_model(config, config.diffusivity),
                          vpfp::initial_densities(config, grid), config.pnp_dt);
  vpfp::io::CsvWriter profiles(dir.file("pnp_profiles.csv"),
                               {"t", "species", "x", "density", "potential"});
  auto write = [&]() {
    for (std::size_t i = 0; i < config.species.size(); ++i)
      for (std::size_t c = 0; c < grid.nx(); ++c)
        profiles.row(sim.time(), config.species[i].label, grid.x(c),
                     sim.state().density[i][c], sim.state().field.potential[c]);
  };
  write();
  for (double t : config.sample_times()) {
    sim.advance_to(t);
    write();
  }
  vpfp::io::write_pnp_diagnostics(dir.file("pnp_diagnostics.csv"), sim.model(), sim.history());

  std::vector<std::string> violations;
  const double worst = vpfp::pnp_worst_energy_increase(sim.history());
  if (worst > 1e-8) violations.push_back("PNP energy increased by " + std::to_string(worst));
  const auto& h = sim.history();
  double drift = 0.0;
  for (const auto& d : h)
    for (std::size_t i = 0; i < d.mass.size(); ++i)
      if (h.front().mass[i] > 0.0)
        drift = std::max(drift, std::abs(d.mass[i] - h.front().mass[i]) / h.front().mass[i]);
  if (drift > 1e-13 * static_cast<double>(h.size()))
    violations.push_back("PNP mass drift " + std::to_string(drift));

  vpfp::io::write_plot_script(dir, "pnp");
  vpfp::io::ManifestInfo info;
  info.subcommand = "pnp";
  info.config_path = o.config_path;
  info.config_text = text;
  info.violations = violations;
  info.results = json{{"steps", h.size() - 1},
                      {"initial_energy", h.front().energy},
                      {"final_energy", h.back().energy},
                      {"worst_energy_increase", worst},
                      {"max_relative_mass_drift", drift}};
  info.wall_seconds = seconds_since(start);
  vpfp::io::write_manifest(dir, &config, info);
  std::cout << "pnp: " << h.size() - 1 << " steps, e(0)=" << h.front().energy
            << ", e(T)=" << h.back().energy << ", outputs in " << o.out_dir << '\n';
  return finish(o, violations);
}

int run_sweep(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  std::string text;
  const auto config = load(o, text);
  vpfp::io::OutputDir dir(o.out_dir);
  const auto result =
      vpfp::sweep_epsilon(config, [](const std::string& s) { std::cerr << s << '\n'; });
  vpfp::io::write_sweep(dir, config, result);

  std::vector<std::string> violations;
  for (const auto& run : result.runs) {
    const std::string tag = " (epsilon=" + std::to_string(run.epsilon) + ")";
    for (const auto& v : run.dissipation.violations) violations.push_back(v + tag);
    if (run.max_wall_flux > 1e-14)
      violations.push_back("wall flux " + std::to_string(run.max_wall_flux) + tag);
    if (run.min_ck_residual < -vpfp::kCkTolerance)
      violations.push_back("Csiszar-Kullback residual negative" + tag);
    if (run.min_logsobolev_residual < -vpfp::kLogSobolevTolerance)
      violations.push_back("log-Sobolev residual negative" + tag);
    if (run.max_relative_mass_drift > 1e-12 * static_cast<double>(std::max<std::size_t>(run.steps, 1)))
      violations.push_back("mass drift" + tag);
  }
  vpfp::io::write_plot_script(dir, "sweep");
  vpfp::io::ManifestInfo info;
  info.subcommand = "sweep";
  info.config_path = o.config_path;
  info.config_text = text;
  info.violations = violations;
  info.results = vpfp::io::sweep_summary_json(config, result);
  info.wall_seconds = seconds_since(start);
  vpfp::io::write_manifest(dir, &config, info);

  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    const auto& run = result.runs[k];
    std::printf("epsilon=%-8g steps=%-6zu", run.epsilon, run.steps);
    for (std::size_t i = 0; i < run.sup_n_gap.size(); ++i)
      std::printf(" n_gap[%s]=%.4e", config.species[i].label.c_str(), run.sup_n_gap[i]);
    std::printf("\n");
  }
  for (std::size_t i = 0; i < result.n_gap_order.size(); ++i)
    std::printf("order n_gap[%s] = %.3f\n", config.species[i].label.c_str(),
                result.n_gap_order[i].slope);
  std::printf("limit current verdict: %s\n", result.current.verdict.c_str());
  return finish(o, violations);
}

int run_checks(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = vpfp::run_identity_checks();
  vpfp::io::OutputDir dir(o.out_dir);
  vpfp::io::CsvWriter csv(dir.file("checks.csv"), {"check", "value", "threshold", "passed"});
  bool ok = true;
  json rows = json::array();
  for (const auto& r : results) {
    csv.row(r.name, r.value, r.threshold, r.passed ? 1 : 0);
    std::printf("%-28s %s  value=%.3e threshold=%.3e  %s\n", r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.value, r.threshold, r.detail.c_str());
    rows.push_back({{"check", r.name}, {"value", r.value}, {"threshold", r.threshold},
                    {"passed", r.passed}, {"detail", r.detail}});
    ok = ok && r.passed;
  }
  vpfp::io::ManifestInfo info;
  info.subcommand = "checks";
  info.results = rows;
  info.wall_seconds = seconds_since(start);
  vpfp::io::write_manifest(dir, nullptr, info);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vlasov-Poisson-Fokker-Planck / Poisson-Nernst-Planck lab", "vpfp_lab"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "YAML run configuration");
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_flag("--strict", o.strict, "nonzero exit when an invariant is violated");
  app.add_option("--mode", o.mode, "wall reflection override")
      ->check(CLI::IsMember({"diffuse", "specular", "inverse"}));
  app.add_option("--diffusivity", o.diffusivity, "PNP diffusivity override")
      ->check(CLI::IsMember({"kappa-over-zeta", "one-over-zeta"}));
  auto* vpfp_cmd = app.add_subcommand("vpfp", "single kinetic run");
  auto* pnp_cmd = app.add_subcommand("pnp", "Poisson-Nernst-Planck run");
  auto* sweep_cmd = app.add_subcommand("sweep", "epsilon sweep against the PNP limit");
  auto* checks_cmd = app.add_subcommand("checks", "operator identity checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*vpfp_cmd) return run_vpfp(o);
    if (*pnp_cmd) return run_pnp(o);
    if (*sweep_cmd) return run_sweep(o);
    if (*checks_cmd) return run_checks(o);
  } catch (const vpfp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << app.help();
  return 2;
}

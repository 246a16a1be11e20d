#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "vpfp/io/config_loader.hpp"
#include "vpfp/io/output.hpp"
#include "vpfp/vpfp.hpp"

namespace {

namespace fs = std::filesystem;
using namespace vpfp;

const std::string kPair = R"(
species:
  - {label: cation, valence: 1, initial: 1.0}
  - {label: anion, valence: -1, initial: 1.0}
)";

std::string config_error_path(const std::string& text) {
  try {
    io::parse_config(text);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<no error>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Cli {
  int status = 0;
  std::string output;
};

Cli run_cli(const std::string& args) {
  const fs::path log = fs::path(VPFP_SCRATCH_DIR) / "cli_log.txt";
  fs::create_directories(VPFP_SCRATCH_DIR);
  const std::string cmd = std::string("\"") + VPFP_LAB_BINARY + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Cli r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = slurp(log);
  return r;
}

TEST(ConfigLoader, MinimalConfigTakesDefaults) {
  const auto c = io::load_config(std::string(VPFP_CONFIG_DIR) + "/minimal.yaml");
  ASSERT_EQ(c.species.size(), 2u);
  EXPECT_EQ(c.species[0].label, "species0");
  EXPECT_EQ(c.species[1].valence, -1);
  EXPECT_DOUBLE_EQ(c.species[0].kappa, 1.0);
  EXPECT_EQ(c.epsilons, std::vector<double>{0.25});
  EXPECT_FALSE(c.sweep_mode());
  EXPECT_EQ(c.nx, 64u);
  EXPECT_EQ(c.reflection, ReflectionMode::diffuse);
  EXPECT_EQ(c.diffusivity, DiffusivityMode::kappa_over_zeta);
  const auto echo = io::to_json(c);
  EXPECT_EQ(echo["run"]["epsilon"][0], 0.25);
  EXPECT_EQ(echo["species"][1]["valence"], -1);
}

TEST(ConfigLoader, FullVocabulary) {
  const auto d = io::parse_config(R"(
run: {epsilon: [0.5, 0.25, 0.125], varpi: 0.5, final_time: 0.3, output_interval: 0.1, cfl: 0.8}
grid: {nx: 16, nv: 24, length: 2.0, vmax: 6.0}
species:
  - label: a
    valence: 1
    kappa: 2.0
    zeta: 0.5
    initial: {kind: cosine, base: 1.0, amplitude: 0.1, mode: 2}
  - label: b
    valence: -1
    initial: {kind: cosine, base: 1.0, amplitude: -0.1, mode: 2}
background: {kind: ramp, left: 0.5, right: -0.5}
boundary: {mode: specular}
pnp: {dt: 5.0e-5, diffusivity: one-over-zeta}
)");
  EXPECT_TRUE(d.sweep_mode());
  EXPECT_EQ(d.epsilons.size(), 3u);
  EXPECT_DOUBLE_EQ(d.varpi, 0.5);
  EXPECT_EQ(d.nv, 24u);
  ASSERT_TRUE(d.vmax.has_value());
  EXPECT_DOUBLE_EQ(*d.vmax, 6.0);
  EXPECT_EQ(d.initial[0].kind, DensityProfile::Kind::cosine);
  EXPECT_EQ(d.initial[0].mode, 2);
  EXPECT_EQ(d.background.kind, BackgroundProfile::Kind::ramp);
  EXPECT_EQ(d.reflection, ReflectionMode::specular);
  EXPECT_EQ(d.diffusivity, DiffusivityMode::one_over_zeta);
  EXPECT_DOUBLE_EQ(d.pnp_dt, 5e-5);
  const auto times = d.sample_times();
  ASSERT_EQ(times.size(), 3u);
  EXPECT_DOUBLE_EQ(times.back(), 0.3);
}

TEST(ConfigLoader, ErrorsNameTheKeyPath) {
  EXPECT_EQ(config_error_path(R"(
species:
  - {valence: 1, kappa: -1, initial: 1.0}
  - {valence: -1, initial: 1.0}
)"),
            "species[0].kappa");
  EXPECT_EQ(config_error_path("grid: {nxx: 4}\n" + kPair), "grid.nxx");
  EXPECT_EQ(config_error_path("run: {epsilon: [0.5, -0.1]}\n" + kPair), "run.epsilon[1]");
  EXPECT_EQ(config_error_path("grid: {nv: 7}\n" + kPair), "grid.nv");
  EXPECT_EQ(config_error_path("boundary: {mode: sticky}\n" + kPair), "boundary.mode");
  EXPECT_EQ(config_error_path("run: {cfl: 1.5}\n" + kPair), "run.cfl");
  EXPECT_EQ(config_error_path("colour: blue\n" + kPair), "colour");
  EXPECT_EQ(config_error_path("run: [1, 2"), "<document>");
  EXPECT_EQ(config_error_path("run: {epsilon: 0.1}\n"), "species");
}

TEST(ConfigLoader, RejectsNonNeutralInitialData) {
  EXPECT_EQ(config_error_path(R"(
species:
  - {valence: 1, initial: 1.0}
  - {valence: -1, initial: 0.5}
)"),
            "species");
  EXPECT_NO_THROW(io::parse_config(R"(
background: 0.5
species:
  - {valence: 1, initial: 0.5}
  - {valence: -1, initial: 1.0}
)"));
}

TEST(ConfigLoader, HighFieldParsesButHasNoSolver) {
  const auto c = io::parse_config("run: {scaling: high-field}\n" + kPair);
  EXPECT_EQ(c.scaling, Scaling::high_field);
  EXPECT_THROW(make_model(c, c.epsilon()), NotImplemented);
}

// FIPS 180-2 test vectors.
TEST(Output, Sha256KnownVectors) {
  EXPECT_EQ(io::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Output, CsvRoundTripsDoublesExactly) {
  const fs::path dir = fs::path(VPFP_SCRATCH_DIR) / "csv";
  fs::create_directories(dir);
  const double values[] = {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23};
  {
    io::CsvWriter csv(dir / "t.csv", {"a", "b", "c", "d"});
    csv.row(values[0], values[1], values[2], values[3]);
  }
  std::ifstream in(dir / "t.csv");
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "a,b,c,d");
  std::stringstream ss(line);
  std::string cell;
  for (double v : values) {
    std::getline(ss, cell, ',');
    EXPECT_EQ(std::stod(cell), v);
  }
}

TEST(Cli, ChecksSubcommandPasses) {
  const auto out = (fs::path(VPFP_SCRATCH_DIR) / "checks").string();
  const auto r = run_cli("checks --out \"" + out + "\"");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("maxwellian_nullspace"), std::string::npos);
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(out) / "manifest.json"));
}

TEST(Cli, UsageErrors) {
  const auto bogus = run_cli("frobnicate");
  EXPECT_NE(bogus.status, 0);
  EXPECT_NE(bogus.output.find("Usage"), std::string::npos);
  const auto none = run_cli("");
  EXPECT_NE(none.status, 0);
  const auto missing = run_cli("vpfp");
  EXPECT_NE(missing.status, 0);
  EXPECT_NE(missing.output.find("--config"), std::string::npos);
}

TEST(Cli, BadConfigReportsKeyPath) {
  const fs::path dir = fs::path(VPFP_SCRATCH_DIR) / "bad";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "bad.yaml");
    out << "species:\n  - {valence: 1, kappa: -1, initial: 1.0}\n  - {valence: -1, initial: 1.0}\n";
  }
  const auto r = run_cli("vpfp --config \"" + (dir / "bad.yaml").string() + "\" --out \"" +
                         (dir / "out").string() + "\"");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("species[0].kappa"), std::string::npos) << r.output;
}

TEST(Cli, VpfpRunWritesManifestedFilesDeterministically) {
  const std::string config = std::string(VPFP_CONFIG_DIR) + "/charged.yaml";
  const fs::path a = fs::path(VPFP_SCRATCH_DIR) / "run_a";
  const fs::path b = fs::path(VPFP_SCRATCH_DIR) / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto ra = run_cli("vpfp --strict --config \"" + config + "\" --out \"" + a.string() + "\"");
  const auto rb = run_cli("vpfp --strict --config \"" + config + "\" --out \"" + b.string() + "\"");
  ASSERT_EQ(ra.status, 0) << ra.output;
  ASSERT_EQ(rb.status, 0) << rb.output;

  const auto manifest = io::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["config_sha256"], io::sha256_hex(slurp(config)));
  EXPECT_EQ(manifest["subcommand"], "vpfp");
  EXPECT_TRUE(manifest["violations"].empty());
  EXPECT_TRUE(manifest["results"]["dissipation_passed"].get<bool>());
  std::size_t csv_files = 0;
  for (const auto& name : manifest["files"]) {
    const auto file = name.get<std::string>();
    EXPECT_TRUE(fs::exists(a / file)) << file;
    if (file.ends_with(".csv")) {
      ++csv_files;
      EXPECT_EQ(slurp(a / file), slurp(b / file)) << file;
    }
  }
  EXPECT_EQ(csv_files, 2u);
  const auto diag = slurp(a / "diagnostics.csv");
  EXPECT_EQ(diag.substr(0, diag.find('\n')), [] {
    std::string h;
    for (const auto& c : io::diagnostics_header()) h += (h.empty() ? "" : ",") + c;
    return h;
  }());
}

TEST(Cli, PnpRunAndModeOverride) {
  const std::string config = std::string(VPFP_CONFIG_DIR) + "/heat_mode.yaml";
  const fs::path out = fs::path(VPFP_SCRATCH_DIR) / "pnp";
  const auto r = run_cli("pnp --strict --diffusivity one-over-zeta --config \"" + config +
                         "\" --out \"" + out.string() + "\"");
  ASSERT_EQ(r.status, 0) << r.output;
  const auto manifest = io::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["config"]["pnp"]["diffusivity"], "one-over-zeta");
  const auto bad = run_cli("vpfp --mode sticky --config \"" + config + "\"");
  EXPECT_NE(bad.status, 0);
}

}  // namespace

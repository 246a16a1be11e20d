#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "vpfp/config.hpp"
#include "vpfp/error.hpp"

namespace vpfp::io {

namespace detail {

inline void check_keys(const YAML::Node& node, const std::string& path,
                       const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <class T>
T read(const YAML::Node& parent, const std::string& key, const std::string& path,
       const T& fallback) {
  const auto node = parent[key];
  if (!node) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "cannot parse value '" + YAML::Dump(node) + "'");
  }
}

template <class T>
T require(const YAML::Node& parent, const std::string& key, const std::string& path) {
  if (!parent[key]) throw ConfigError(path, "missing required key");
  return read<T>(parent, key, path, T{});
}

inline std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

inline DensityProfile parse_density(const YAML::Node& node, const std::string& path) {
  DensityProfile p;
  if (!node) throw ConfigError(path, "missing required key");
  if (node.IsScalar()) {
    p.kind = DensityProfile::Kind::constant;
    try {
      p.base = node.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path, "expected a number or a mapping");
    }
    return p;
  }
  check_keys(node, path, {"kind", "base", "value", "amplitude", "mode", "center", "width"});
  const auto kind = read<std::string>(node, "kind", join(path, "kind"), "constant");
  if (kind == "constant") {
    p.kind = DensityProfile::Kind::constant;
    p.base = read<double>(node, "value", join(path, "value"),
                          read<double>(node, "base", join(path, "base"), 1.0));
  } else if (kind == "cosine") {
    p.kind = DensityProfile::Kind::cosine;
    p.base = read<double>(node, "base", join(path, "base"), 1.0);
    p.amplitude = require<double>(node, "amplitude", join(path, "amplitude"));
    p.mode = read<int>(node, "mode", join(path, "mode"), 1);
  } else if (kind == "gaussian") {
    p.kind = DensityProfile::Kind::gaussian;
    p.base = read<double>(node, "base", join(path, "base"), 0.0);
    p.amplitude = require<double>(node, "amplitude", join(path, "amplitude"));
    p.center = read<double>(node, "center", join(path, "center"), 0.5);
    p.width = require<double>(node, "width", join(path, "width"));
  } else {
    throw ConfigError(join(path, "kind"), "expected constant, cosine or gaussian, got '" + kind + "'");
  }
  return p;
}

inline ReflectionMode parse_reflection(const std::string& s, const std::string& path) {
  if (s == "diffuse") return ReflectionMode::diffuse;
  if (s == "specular") return ReflectionMode::specular;
  if (s == "inverse") return ReflectionMode::inverse;
  throw ConfigError(path, "expected diffuse, specular or inverse, got '" + s + "'");
}

inline DiffusivityMode parse_diffusivity(const std::string& s, const std::string& path) {
  if (s == "kappa-over-zeta") return DiffusivityMode::kappa_over_zeta;
  if (s == "one-over-zeta") return DiffusivityMode::one_over_zeta;
  throw ConfigError(path, "expected kappa-over-zeta or one-over-zeta, got '" + s + "'");
}

}  // namespace detail

inline ReflectionMode parse_reflection(const std::string& s) {
  return detail::parse_reflection(s, "boundary.mode");
}

inline DiffusivityMode parse_diffusivity(const std::string& s) {
  return detail::parse_diffusivity(s, "pnp.diffusivity");
}

/**
 * Builds a RunConfig from YAML text. Sections: run, grid, species (list),
 * background, boundary, pnp. Missing optional keys take the RunConfig defaults;
 * every error names the offending key path.
 */
inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("invalid YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("<document>", "expected a mapping at top level");
  check_keys(root, "", {"run", "grid", "species", "background", "boundary", "pnp"});

  RunConfig c;
  if (const auto run = root["run"]) {
    check_keys(run, "run",
               {"epsilon", "varpi", "final_time", "output_interval", "cfl", "scaling"});
    if (const auto eps = run["epsilon"]) {
      c.epsilons.clear();
      if (eps.IsSequence()) {
        for (std::size_t i = 0; i < eps.size(); ++i) {
          const std::string p = "run.epsilon[" + std::to_string(i) + "]";
          try {
            c.epsilons.push_back(eps[i].as<double>());
          } catch (const YAML::Exception&) {
            throw ConfigError(p, "cannot parse value");
          }
        }
      } else {
        c.epsilons.push_back(read<double>(run, "epsilon", "run.epsilon", 0.0));
      }
    }
    c.varpi = read<double>(run, "varpi", "run.varpi", c.varpi);
    c.final_time = read<double>(run, "final_time", "run.final_time", c.final_time);
    c.output_interval =
        read<double>(run, "output_interval", "run.output_interval", c.output_interval);
    c.cfl = read<double>(run, "cfl", "run.cfl", c.cfl);
    const auto scaling = read<std::string>(run, "scaling", "run.scaling", "low-field");
    if (scaling == "low-field") {
      c.scaling = Scaling::low_field;
    } else if (scaling == "high-field") {
      c.scaling = Scaling::high_field;
    } else {
      throw ConfigError("run.scaling", "expected low-field or high-field, got '" + scaling + "'");
    }
  }

  if (const auto grid = root["grid"]) {
    check_keys(grid, "grid", {"nx", "nv", "length", "vmax"});
    const long nx = read<long>(grid, "nx", "grid.nx", static_cast<long>(c.nx));
    const long nv = read<long>(grid, "nv", "grid.nv", static_cast<long>(c.nv));
    if (nx < 2) throw ConfigError("grid.nx", "need at least 2 cells");
    if (nv < 2) throw ConfigError("grid.nv", "must be even and >= 2");
    c.nx = static_cast<std::size_t>(nx);
    c.nv = static_cast<std::size_t>(nv);
    c.length = read<double>(grid, "length", "grid.length", c.length);
    if (grid["vmax"]) c.vmax = read<double>(grid, "vmax", "grid.vmax", 0.0);
  }

  const auto species = root["species"];
  if (!species) throw ConfigError("species", "missing required key");
  if (!species.IsSequence() || species.size() == 0)
    throw ConfigError("species", "expected a non-empty list");
  for (std::size_t i = 0; i < species.size(); ++i) {
    const std::string path = "species[" + std::to_string(i) + "]";
    const auto node = species[i];
    check_keys(node, path, {"label", "valence", "kappa", "zeta", "initial"});
    SpeciesParams s;
    s.label = read<std::string>(node, "label", path + ".label", "species" + std::to_string(i));
    s.valence = read<int>(node, "valence", path + ".valence", 0);
    s.kappa = read<double>(node, "kappa", path + ".kappa", 1.0);
    s.zeta = read<double>(node, "zeta", path + ".zeta", 1.0);
    c.species.push_back(s);
    c.initial.push_back(parse_density(node["initial"], path + ".initial"));
  }

  if (const auto bg = root["background"]) {
    if (bg.IsScalar()) {
      c.background.value = read<double>(root, "background", "background", 0.0);
    } else {
      check_keys(bg, "background", {"kind", "value", "left", "right"});
      const auto kind = read<std::string>(bg, "kind", "background.kind", "constant");
      if (kind == "constant") {
        c.background.kind = BackgroundProfile::Kind::constant;
        c.background.value = read<double>(bg, "value", "background.value", 0.0);
      } else if (kind == "ramp") {
        c.background.kind = BackgroundProfile::Kind::ramp;
        c.background.left = require<double>(bg, "left", "background.left");
        c.background.right = require<double>(bg, "right", "background.right");
      } else {
        throw ConfigError("background.kind", "expected constant or ramp, got '" + kind + "'");
      }
    }
  }

  if (const auto b = root["boundary"]) {
    check_keys(b, "boundary", {"mode"});
    c.reflection = parse_reflection(read<std::string>(b, "mode", "boundary.mode", "diffuse"),
                                    "boundary.mode");
  }

  if (const auto p = root["pnp"]) {
    check_keys(p, "pnp", {"dt", "diffusivity"});
    c.pnp_dt = read<double>(p, "dt", "pnp.dt", c.pnp_dt);
    c.diffusivity = parse_diffusivity(
        read<std::string>(p, "diffusivity", "pnp.diffusivity", "kappa-over-zeta"),
        "pnp.diffusivity");
  }

  validate(c);
  check_config_neutrality(c);
  return c;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

}  // namespace vpfp::io

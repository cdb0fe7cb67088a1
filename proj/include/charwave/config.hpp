#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "charwave/errors.hpp"
#include "charwave/ivp.hpp"
#include "charwave/nonlinearity.hpp"
#include "charwave/potential.hpp"
#include "charwave/util.hpp"

namespace charwave {

using json = nlohmann::json;

// Shipped initial-data profiles: compactly supported C^3 bumps.
inline DataProfile make_profile(const json& j, const std::string& field) {
  auto need = [&](const char* key) {
    if (!j.contains(key))
      throw ConfigInvalid(field + ": missing required field '" + key + "'");
    return j.at(key).get<double>();
  };
  std::string kind = j.value("kind", "zero");
  DataProfile p;
  if (kind == "zero") return p;
  if (kind == "bump" || kind == "cos_bump") {
    double c = need("center"), w = need("width"), A = need("amplitude");
    double k = kind == "cos_bump" ? need("wavenumber") : 0.0;
    if (!(w > 0)) throw ConfigInvalid(field + ": bump width must be positive");
    auto psi = [](double s) {
      if (std::abs(s) >= 1) return 0.0;
      double q = 1 - s * s;
      return q * q * q * q;
    };
    auto dpsi = [](double s) {
      if (std::abs(s) >= 1) return 0.0;
      double q = 1 - s * s;
      return -8 * s * q * q * q;
    };
    p.value = [=](double x) {
      double s = (x - c) / w;
      return A * psi(s) * (k == 0.0 ? 1.0 : std::cos(k * (x - c)));
    };
    p.derivative = [=](double x) {
      double s = (x - c) / w;
      if (k == 0.0) return A * dpsi(s) / w;
      return A * (dpsi(s) / w * std::cos(k * (x - c)) - psi(s) * k * std::sin(k * (x - c)));
    };
    p.support_hi = c + w;
    return p;
  }
  throw ConfigInvalid(field + ": unknown profile kind '" + kind + "'");
}

inline PotentialSpec parse_potential_spec(const json& j) {
  PotentialSpec spec;
  spec.gap_floor = j.value("gap_floor", 1e-2);
  if (j.value("kind", "") == "a5") {
    for (const char* key : {"a", "b", "theta", "x_max"})
      if (!j.contains(key)) throw ConfigInvalid(std::string("potential: a5 needs '") + key + "'");
    return step_potential_a5(j.at("a").get<double>(), j.at("b").get<double>(),
                             j.at("theta").get<double>(), j.at("x_max").get<double>(),
                             spec.gap_floor);
  }
  if (!j.contains("pieces")) throw ConfigInvalid("potential: missing 'pieces'");
  for (const auto& pj : j.at("pieces")) {
    PotentialPiece p;
    p.x0 = pj.value("x0", 0.0);
    p.x1 = pj.value("x1", 0.0);
    std::string kind = pj.value("kind", "const");
    if (kind == "const") {
      if (!pj.contains("value")) throw ConfigInvalid("potential piece: missing 'value'");
      p.is_const = true;
      p.value = pj.at("value").get<double>();
    } else if (kind == "expr") {
      p.is_const = false;
      const json& v = pj.at("value");
      std::string form = v.value("form", "");
      if (form == "exp") {
        double scale = v.value("scale", 1.0), rate = v.value("rate", 1.0);
        p.V = [scale, rate](double x) { return scale * std::exp(rate * x); };
        p.dV = [scale, rate](double x) { return scale * rate * std::exp(rate * x); };
      } else if (form == "poly") {
        std::vector<double> c = v.at("coeffs").get<std::vector<double>>();
        p.V = [c](double x) {
          double acc = 0;
          for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
          return acc;
        };
        p.dV = [c](double x) {
          double acc = 0;
          for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + c[i] * static_cast<double>(i);
          return acc;
        };
      } else {
        throw ConfigInvalid("potential piece: unknown expr form '" + form +
                            "' (supported: exp, poly)");
      }
    } else {
      throw ConfigInvalid("potential piece: unknown kind '" + kind + "'");
    }
    spec.pieces.push_back(std::move(p));
  }
  return spec;
}

inline Nonlinearity parse_nonlinearity(const json& j) {
  std::string kind = j.value("kind", "");
  if (kind == "cubic") {
    if (!j.contains("gamma")) throw ConfigInvalid("nonlinearity: missing 'gamma'");
    Nonlinearity nl = make_cubic(j.at("gamma").get<double>());
    if (j.contains("K")) return cutoff(nl, j.at("K").get<double>());
    return nl;
  }
  if (kind == "linear") {
    if (!j.contains("a")) throw ConfigInvalid("nonlinearity: missing 'a'");
    Nonlinearity nl = make_linear(j.at("a").get<double>());
    if (j.contains("K")) return cutoff(nl, j.at("K").get<double>());
    return nl;
  }
  if (kind == "cutoff") {
    if (!j.contains("K")) throw ConfigInvalid("nonlinearity: cutoff needs 'K'");
    Nonlinearity base = j.contains("gamma") ? make_cubic(j.at("gamma").get<double>())
                        : j.contains("a")   ? make_linear(j.at("a").get<double>())
                                            : throw ConfigInvalid(
                                                  "nonlinearity: cutoff needs 'gamma' or 'a'");
    return cutoff(base, j.at("K").get<double>());
  }
  throw ConfigInvalid("nonlinearity: unknown kind '" + kind + "' (cubic|linear|cutoff)");
}

struct ParsedConfig {
  json echo;  // effective configuration with defaults filled in
  PotentialSpec potential_spec;
  Potential potential;
  Nonlinearity nl;
  InitialData data;
  SolverParams params;
  double tolerance = 1e-10;
  unsigned seed = 12345;
  std::string config_hash;
};

inline ParsedConfig parse_config(const json& j) {
  ParsedConfig c;
  if (!j.contains("potential")) throw ConfigInvalid("missing 'potential' block");
  if (!j.contains("nonlinearity")) throw ConfigInvalid("missing 'nonlinearity' block");
  c.potential_spec = parse_potential_spec(j.at("potential"));
  c.potential = build_potential(c.potential_spec);
  c.nl = parse_nonlinearity(j.at("nonlinearity"));
  const json data_j = j.value("initial_data", json::object());
  c.data.u0 = make_profile(data_j.value("u0", json{{"kind", "zero"}}), "initial_data.u0");
  c.data.u1 = make_profile(data_j.value("u1", json{{"kind", "zero"}}), "initial_data.u1");

  const json grid = j.value("grid", json::object());
  c.params.dz = grid.value("dz", 1e-3);
  c.params.T = j.value("horizon", 1.0);
  const json dom = j.value("domain", json::object());
  std::string mode = dom.value("mode", "half_line");
  if (mode == "bounded") {
    c.params.mode = DomainMode::bounded;
    if (!dom.contains("L")) throw ConfigInvalid("domain: bounded mode needs 'L'");
    c.params.L = dom.at("L").get<double>();
  } else if (mode != "half_line") {
    throw ConfigInvalid("domain.mode must be 'half_line' or 'bounded'");
  }
  const json out = j.value("output", json::object());
  c.params.snapshot_every = out.value("snapshot_every", 0);
  const json tols = j.value("tolerances", json::object());
  c.tolerance = tols.value("tolerance", 1e-10);
  c.params.ode_substeps = tols.value("ode_substeps", 4);
  c.params.cell_iterations = tols.value("cell_iterations", 3);
  const json flags = j.value("flags", json::object());
  c.params.allow_illposed = flags.value("allow_illposed", false);
  c.params.force_general_path = flags.value("general_path", false);
  c.params.margin_z = j.value("margin_z", 0.5);
  c.params.domain_z_end = j.value("domain_z_end", 0.0);
  c.seed = j.value("seed", 12345u);

  // Effective echo: inputs plus defaults, hashed for the manifest.
  c.echo = j;
  c.echo["grid"]["dz"] = c.params.dz;
  c.echo["horizon"] = c.params.T;
  c.echo["domain"]["mode"] = mode;
  c.echo["output"]["snapshot_every"] = c.params.snapshot_every;
  c.echo["tolerances"]["tolerance"] = c.tolerance;
  c.echo["tolerances"]["ode_substeps"] = c.params.ode_substeps;
  c.echo["tolerances"]["cell_iterations"] = c.params.cell_iterations;
  c.echo["flags"]["allow_illposed"] = c.params.allow_illposed;
  c.echo["flags"]["general_path"] = c.params.force_general_path;
  c.echo["seed"] = c.seed;
  c.config_hash = hex64(fnv1a(c.echo.dump()));
  return c;
}

inline ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigInvalid("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

}  // namespace charwave

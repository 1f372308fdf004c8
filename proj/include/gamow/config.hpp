#pragma once

// Run configuration shared by the command-line front end and its tests. Every field has an
// explicit default, parsing rejects keys it does not know, and to_json(default) is the
// complete effective configuration.

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gamow/errors.hpp"
#include "gamow/packets.hpp"
#include "gamow/poles.hpp"
#include "gamow/scattering.hpp"

namespace gamow {

/// Malformed or inconsistent configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PacketSpec {
  enum class Kind { gaussian, resonance };
  Kind kind = Kind::gaussian;
  std::vector<GaussianTerm> terms;  ///< gaussian kind only
  bool normalize = true;            ///< gaussian kind only; resonance packets are always normalized
  int resonance = 1;                ///< resonance kind: index n of the state to localize
  double mu0 = 0.0;                 ///< resonance kind: Gaussian cutoff, 0 selects 1/(2 b^2)
};

struct ExpandSettings {
  std::string bra = "P1";
  std::string ket = "P1";
  double t = 0.5;
  int n_max = 6;
};

struct SurvivalSettings {
  std::string packet = "P_res";
  double t_start = 0.5;
  double t_ratio = 1.08;  ///< geometric grid t_j = t_start t_ratio^j
  double t_stop = 1500.0;
  bool fit = true;
};

struct EigenfunctionSettings {
  int n = 1;
  double r_min = 0.0;
  double r_max = 4.0;
  int samples = 201;
};

struct CheckSettings {
  std::vector<std::string> packets{"P1", "P2", "P3"};
  int poles = 3;           ///< resonances n = 1..poles for the pairing identities
  int norm_poles = 4;      ///< resonances covered by the normalization and orthonormality checks
  std::vector<double> alphas{0.1, 0.5, 1.0};
  std::vector<std::pair<double, double>> green_points{{0.3, 2.7}, {1.2, 0.4}, {2.5, 1.7}, {0.8, 0.8}, {2.9, 1.1}};
};

struct RunConfig {
  double a = 1.0;
  double b = 2.0;
  double v0 = 10.0;
  std::optional<SearchRegion> region;  ///< unset: default resonance box plus bound states
  std::map<std::string, PacketSpec> packets = default_packets();
  std::map<std::string, double> tolerances = default_tolerances();
  std::string format = "auto";  ///< auto: JSON for tables and reports, CSV for sampled curves
  std::string out = "-";
  ExpandSettings expand;
  SurvivalSettings survival;
  EigenfunctionSettings eigenfunction;
  CheckSettings check;

  ShellPotential potential() const {
    try {
      return ShellPotential(a, b, v0);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }

  double tolerance(const std::string& name) const {
    const auto it = tolerances.find(name);
    if (it == tolerances.end()) throw ConfigError("unknown tolerance '" + name + "'");
    return it->second;
  }

  const PacketSpec& packet(const std::string& name) const {
    const auto it = packets.find(name);
    if (it == packets.end()) throw ConfigError("unknown packet '" + name + "'");
    return it->second;
  }

  static std::map<std::string, double> default_tolerances() {
    return {{"jost", 1e-11},           {"symmetry", 1e-10},     {"green", 1e-8},
            {"orthonormality", 1e-6},  {"zeldovich", 1e-6},     {"prop2", 1e-6},
            {"breit_wigner", 1e-5},    {"expansion", 1e-3}};
  }

  static std::map<std::string, PacketSpec> default_packets() {
    std::map<std::string, PacketSpec> p;
    p["P1"].terms = {{1.0, 1, 2.0, 1.5}};
    p["P2"].terms = {{1.0, 2, 3.0, 1.0}};
    p["P3"].terms = {{1.0, 1, 2.0, 1.5}, {-0.5, 1, 4.0, 2.5}};
    p["P_res"].kind = PacketSpec::Kind::resonance;
    return p;
  }

  void validate() const {
    (void)potential();
    if (region) {
      try {
        region->validate();
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
    }
    for (const auto& [name, tol] : tolerances)
      if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tolerance '" + name + "' must be positive");
    if (format != "auto" && format != "json" && format != "csv")
      throw ConfigError("format must be 'auto', 'json' or 'csv'");
    for (const auto& [name, spec] : packets) {
      if (spec.kind == PacketSpec::Kind::gaussian) {
        if (spec.terms.empty()) throw ConfigError("packet '" + name + "' has no terms");
        try {
          (void)WavePacket(spec.terms);
        } catch (const DomainError& e) {
          throw ConfigError("packet '" + name + "': " + e.what());
        }
      } else if (spec.resonance < 1 || !(spec.mu0 >= 0.0)) {
        throw ConfigError("packet '" + name + "': needs resonance >= 1 and mu0 >= 0");
      }
    }
    (void)packet(expand.bra);
    (void)packet(expand.ket);
    if (!(expand.t >= 0.0)) throw ConfigError("expand.t must be non-negative");
    if (expand.n_max < 1) throw ConfigError("n_max must be at least 1");
    (void)packet(survival.packet);
    if (!(survival.t_start > 0.0) || !(survival.t_ratio > 1.0) || !(survival.t_stop >= survival.t_start))
      throw ConfigError("survival grid needs 0 < t_start <= t_stop and t_ratio > 1");
    if (eigenfunction.n < 1) throw ConfigError("eigenfunction.n must be at least 1");
    if (!(eigenfunction.r_min >= 0.0) || !(eigenfunction.r_max > eigenfunction.r_min) || eigenfunction.samples < 2)
      throw ConfigError("eigenfunction grid needs 0 <= r_min < r_max and at least 2 samples");
    for (const auto& name : check.packets) (void)packet(name);
    if (check.poles < 1 || check.norm_poles < 1) throw ConfigError("check pole counts must be at least 1");
    for (double al : check.alphas)
      if (!(al > 0.0)) throw ConfigError("Breit-Wigner alphas must be positive");
    for (const auto& [r, s] : check.green_points)
      if (!(r >= 0.0) || !(s >= 0.0)) throw ConfigError("Green-function points must be non-negative");
  }

  /// Geometric time grid of the survival command.
  std::vector<double> survival_times() const {
    std::vector<double> ts;
    for (int j = 0;; ++j) {
      const double t = survival.t_start * std::pow(survival.t_ratio, j);
      if (t > survival.t_stop * (1.0 + 1e-12)) break;
      ts.push_back(t);
    }
    return ts;
  }

  std::vector<double> radii() const {
    std::vector<double> r(eigenfunction.samples);
    const double h = (eigenfunction.r_max - eigenfunction.r_min) / (eigenfunction.samples - 1);
    for (int i = 0; i < eigenfunction.samples; ++i) r[i] = eigenfunction.r_min + h * i;
    r.back() = eigenfunction.r_max;
    return r;
  }
};

namespace config_detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline json amplitude_json(cplx a) { return a.imag() == 0.0 ? json(a.real()) : json::array({a.real(), a.imag()}); }

inline cplx amplitude_from(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ".amplitude must be a number or [re, im]");
}

inline PacketSpec packet_from(const json& j, const std::string& where) {
  require_keys(j, where, {"kind", "terms", "normalize", "resonance", "mu0"});
  PacketSpec p;
  std::string kind = "gaussian";
  read(j, "kind", kind, where);
  if (kind == "resonance") p.kind = PacketSpec::Kind::resonance;
  else if (kind != "gaussian") throw ConfigError(where + ".kind must be 'gaussian' or 'resonance'");
  const bool resonance = p.kind == PacketSpec::Kind::resonance;
  for (const char* k : {"terms", "normalize"})
    if (resonance && j.contains(k)) throw ConfigError(where + ": resonance packets take no '" + k + "'");
  for (const char* k : {"resonance", "mu0"})
    if (!resonance && j.contains(k)) throw ConfigError(where + ": gaussian packets take no '" + k + "'");
  read(j, "normalize", p.normalize, where);
  read(j, "resonance", p.resonance, where);
  read(j, "mu0", p.mu0, where);
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw ConfigError(where + ".terms must be an array");
    for (std::size_t i = 0; i < j["terms"].size(); ++i) {
      const json& t = j["terms"][i];
      const std::string tw = where + ".terms[" + std::to_string(i) + "]";
      require_keys(t, tw, {"amplitude", "p", "c", "r0"});
      for (const char* k : {"amplitude", "p", "c", "r0"})
        if (!t.contains(k)) throw ConfigError(tw + " is missing '" + k + "'");
      GaussianTerm g{amplitude_from(t["amplitude"], tw), 0, 0.0, 0.0};
      read(t, "p", g.power, tw);
      read(t, "c", g.width, tw);
      read(t, "r0", g.centre, tw);
      p.terms.push_back(g);
    }
  }
  return p;
}

inline json packet_json(const PacketSpec& p) {
  if (p.kind == PacketSpec::Kind::resonance)
    return {{"kind", "resonance"}, {"resonance", p.resonance}, {"mu0", p.mu0}};
  json terms = json::array();
  for (const auto& t : p.terms)
    terms.push_back({{"amplitude", amplitude_json(t.amplitude)}, {"p", t.power}, {"c", t.width}, {"r0", t.centre}});
  return {{"kind", "gaussian"}, {"terms", terms}, {"normalize", p.normalize}};
}

}  // namespace config_detail

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json packets = json::object();
  for (const auto& [name, p] : c.packets) packets[name] = config_detail::packet_json(p);
  json tol = json::object();
  for (const auto& [name, v] : c.tolerances) tol[name] = v;
  json region = nullptr;
  if (c.region)
    region = {{"re_min", c.region->re_min}, {"re_max", c.region->re_max}, {"im_min", c.region->im_min},
              {"im_max", c.region->im_max}, {"grid_step", c.region->grid_step}};
  json green = json::array();
  for (const auto& [r, s] : c.check.green_points) green.push_back({r, s});
  return {
      {"potential", {{"a", c.a}, {"b", c.b}, {"v0", c.v0}}},
      {"region", region},
      {"packets", packets},
      {"tolerances", tol},
      {"output", {{"format", c.format}, {"path", c.out}}},
      {"expand", {{"bra", c.expand.bra}, {"ket", c.expand.ket}, {"t", c.expand.t}, {"n_max", c.expand.n_max}}},
      {"survival",
       {{"packet", c.survival.packet}, {"t_start", c.survival.t_start}, {"t_ratio", c.survival.t_ratio},
        {"t_stop", c.survival.t_stop}, {"fit", c.survival.fit}}},
      {"eigenfunction",
       {{"n", c.eigenfunction.n}, {"r_min", c.eigenfunction.r_min}, {"r_max", c.eigenfunction.r_max},
        {"samples", c.eigenfunction.samples}}},
      {"check",
       {{"packets", c.check.packets}, {"poles", c.check.poles}, {"norm_poles", c.check.norm_poles},
        {"alphas", c.check.alphas}, {"green_points", green}}},
  };
}

/// Parses a configuration document over the defaults. Packets and tolerances given in the
/// document are merged into the default sets by name.
inline RunConfig parse_config(const nlohmann::json& j) {
  using config_detail::read;
  using config_detail::require_keys;
  RunConfig c;
  require_keys(j, "config",
               {"potential", "region", "packets", "tolerances", "output", "expand", "survival", "eigenfunction", "check"});
  if (j.contains("potential")) {
    const auto& p = j["potential"];
    require_keys(p, "potential", {"a", "b", "v0"});
    read(p, "a", c.a, "potential");
    read(p, "b", c.b, "potential");
    read(p, "v0", c.v0, "potential");
  }
  if (j.contains("region") && !j["region"].is_null()) {
    const auto& r = j["region"];
    require_keys(r, "region", {"re_min", "re_max", "im_min", "im_max", "grid_step"});
    for (const char* k : {"re_min", "re_max", "im_min", "im_max"})
      if (!r.contains(k)) throw ConfigError(std::string("region is missing '") + k + "'");
    SearchRegion reg{0, 0, 0, 0};
    read(r, "re_min", reg.re_min, "region");
    read(r, "re_max", reg.re_max, "region");
    read(r, "im_min", reg.im_min, "region");
    read(r, "im_max", reg.im_max, "region");
    read(r, "grid_step", reg.grid_step, "region");
    c.region = reg;
  }
  if (j.contains("packets")) {
    if (!j["packets"].is_object()) throw ConfigError("packets must be an object");
    for (const auto& item : j["packets"].items())
      c.packets[item.key()] = config_detail::packet_from(item.value(), "packets." + item.key());
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    for (const auto& item : t.items()) {
      if (!c.tolerances.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in tolerances");
      if (!item.value().is_number()) throw ConfigError("tolerances." + item.key() + " must be a number");
      c.tolerances[item.key()] = item.value().get<double>();
    }
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    require_keys(o, "output", {"format", "path"});
    read(o, "format", c.format, "output");
    read(o, "path", c.out, "output");
  }
  if (j.contains("expand")) {
    const auto& e = j["expand"];
    require_keys(e, "expand", {"bra", "ket", "t", "n_max"});
    read(e, "bra", c.expand.bra, "expand");
    read(e, "ket", c.expand.ket, "expand");
    read(e, "t", c.expand.t, "expand");
    read(e, "n_max", c.expand.n_max, "expand");
  }
  if (j.contains("survival")) {
    const auto& s = j["survival"];
    require_keys(s, "survival", {"packet", "t_start", "t_ratio", "t_stop", "fit"});
    read(s, "packet", c.survival.packet, "survival");
    read(s, "t_start", c.survival.t_start, "survival");
    read(s, "t_ratio", c.survival.t_ratio, "survival");
    read(s, "t_stop", c.survival.t_stop, "survival");
    read(s, "fit", c.survival.fit, "survival");
  }
  if (j.contains("eigenfunction")) {
    const auto& e = j["eigenfunction"];
    require_keys(e, "eigenfunction", {"n", "r_min", "r_max", "samples"});
    read(e, "n", c.eigenfunction.n, "eigenfunction");
    read(e, "r_min", c.eigenfunction.r_min, "eigenfunction");
    read(e, "r_max", c.eigenfunction.r_max, "eigenfunction");
    read(e, "samples", c.eigenfunction.samples, "eigenfunction");
  }
  if (j.contains("check")) {
    const auto& k = j["check"];
    require_keys(k, "check", {"packets", "poles", "norm_poles", "alphas", "green_points"});
    read(k, "packets", c.check.packets, "check");
    read(k, "poles", c.check.poles, "check");
    read(k, "norm_poles", c.check.norm_poles, "check");
    read(k, "alphas", c.check.alphas, "check");
    if (k.contains("green_points")) {
      c.check.green_points.clear();
      for (const auto& pt : k["green_points"]) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
          throw ConfigError("check.green_points entries must be [r, s]");
        c.check.green_points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
      }
    }
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace gamow

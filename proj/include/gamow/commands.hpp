#pragma once

// The command layer behind the CLI: each command maps a RunConfig to rendered output and
// an exit status.
//   0 success, 1 configuration error, 2 numerical failure (partial output flagged),
//   3 identity check failed, 4 background integral diverged.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gamow/config.hpp"
#include "gamow/errors.hpp"
#include "gamow/expansion.hpp"
#include "gamow/io.hpp"
#include "gamow/poles.hpp"
#include "gamow/spectral.hpp"
#include "gamow/states.hpp"

namespace gamow {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_check_failed = 3, exit_divergence = 4 };

struct CommandResult {
  std::string output;
  int exit_code = exit_ok;
  std::string message;  ///< diagnostics for stderr
};

/// Pole search over the configured region, or the default region plus bound states.
inline PoleSearch search_poles(const RunConfig& cfg) {
  PoleFinder finder(cfg.potential());
  return cfg.region ? finder.find_poles(*cfg.region) : default_pole_search(finder);
}

inline ResonanceExpansion expansion_for(const RunConfig& cfg) {
  const ShellScattering scat(cfg.potential());
  return ResonanceExpansion::from_search(scat, search_poles(cfg));
}

inline std::string effective_format(const RunConfig& cfg, const char* fallback) {
  return cfg.format == "auto" ? std::string(fallback) : cfg.format;
}

inline CommandResult cmd_poles(const RunConfig& cfg) {
  const PoleSearch search = search_poles(cfg);
  const auto ordered = io::table_order(search.poles);
  CommandResult res;
  std::ostringstream os;
  if (effective_format(cfg, "json") == "csv") {
    os << "n,k_re,k_im,z_re,z_im,gamma,kind,jost_residual\n";
    for (const auto& p : ordered) {
      os << p.n << ',' << io::number(p.k.real()) << ',' << io::number(p.k.imag()) << ',' << io::number(p.z.real())
         << ',' << io::number(p.z.imag()) << ',' << io::number(p.width()) << ',' << to_string(p.kind) << ','
         << io::number(p.jost_residual) << '\n';
    }
  } else if (search.failures.empty()) {
    io::write_json(os, io::pole_table(search.poles));
  } else {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : search.failures)
      failures.push_back({{"re_min", f.cell.re_min}, {"re_max", f.cell.re_max}, {"im_min", f.cell.im_min},
                          {"im_max", f.cell.im_max}, {"message", f.message}});
    io::write_json(os, {{"partial", true}, {"poles", io::pole_table(search.poles)}, {"failures", failures}});
  }
  res.output = os.str();
  if (!search.failures.empty()) {
    res.exit_code = exit_numerical;
    res.message = std::to_string(search.failures.size()) + " search cell(s) did not converge; pole table is partial";
  }
  return res;
}

inline CommandResult cmd_eigenfunction(const RunConfig& cfg) {
  const PoleSearch search = search_poles(cfg);
  const int n = cfg.eigenfunction.n;
  const auto it = std::find_if(search.poles.begin(), search.poles.end(),
                               [&](const Pole& p) { return p.kind == PoleKind::resonance && p.n == n; });
  if (it == search.poles.end()) throw ConfigError("unknown resonance index n = " + std::to_string(n));
  const GamowState s = build_state(ShellScattering(cfg.potential()), *it, search.poles);
  const auto radii = cfg.radii();
  CommandResult res;
  std::ostringstream os;
  if (effective_format(cfg, "csv") == "csv") {
    io::write_eigenfunction_csv(os, s, radii);
  } else {
    nlohmann::json j = io::to_json(s);
    nlohmann::json rows = nlohmann::json::array();
    for (double r : radii) {
      const cplx u = s(r);
      rows.push_back({r, u.real(), u.imag(), std::abs(u)});
    }
    j["columns"] = {"r", "re_u", "im_u", "abs_u"};
    j["samples"] = rows;
    io::write_json(os, j);
  }
  res.output = os.str();
  return res;
}

struct CheckEntry {
  std::string name;
  std::string identity;
  double residual = 0.0;
  double tolerance = 0.0;
  enum class Status { pass, fail, skipped } status = Status::pass;
  std::string detail;
};

inline const char* to_string(CheckEntry::Status s) {
  switch (s) {
    case CheckEntry::Status::pass: return "pass";
    case CheckEntry::Status::fail: return "fail";
    case CheckEntry::Status::skipped: return "skipped";
  }
  return "unknown";
}

struct CheckReport {
  std::vector<CheckEntry> entries;

  bool passed() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const CheckEntry& e) { return e.status == CheckEntry::Status::fail; });
  }

  std::vector<std::string> failed() const {
    std::vector<std::string> names;
    for (const auto& e : entries)
      if (e.status == CheckEntry::Status::fail) names.push_back(e.name);
    return names;
  }
};

inline nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json j = {{"name", e.name}, {"identity", e.identity}, {"status", to_string(e.status)}};
    if (e.status == CheckEntry::Status::skipped) {
      j["residual"] = nullptr;
      j["tolerance"] = e.tolerance;
    } else {
      j["residual"] = e.residual;
      j["tolerance"] = e.tolerance;
    }
    j["detail"] = e.detail;
    arr.push_back(j);
  }
  return {{"passed", r.passed()}, {"failed", r.failed()}, {"checks", arr}};
}

namespace check_detail {

inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

inline void record(CheckReport& rep, std::string name, const char* identity, double tol,
                   const std::function<double()>& residual) {
  CheckEntry e{std::move(name), identity, 0.0, tol, CheckEntry::Status::pass, {}};
  try {
    e.residual = residual();
    e.status = e.residual <= tol ? CheckEntry::Status::pass : CheckEntry::Status::fail;
  } catch (const Error& ex) {
    e.status = CheckEntry::Status::fail;
    e.residual = std::nan("");
    e.detail = ex.what();
  }
  rep.entries.push_back(std::move(e));
}

inline void skip(CheckReport& rep, std::string name, const char* identity, double tol, std::string why) {
  rep.entries.push_back({std::move(name), identity, 0.0, tol, CheckEntry::Status::skipped, std::move(why)});
}

}  // namespace check_detail

/// Runs every identity the library promises against the configured shell.
inline CheckReport run_checks(const RunConfig& cfg) {
  using check_detail::record;
  using check_detail::rel;
  using check_detail::skip;
  const ShellScattering scat(cfg.potential());
  const PoleSearch search = search_poles(cfg);
  if (!search.failures.empty()) throw ConvergenceError("pole search left unresolved cells");
  CheckReport rep;

  std::vector<Pole> res_poles = search.resonances();
  std::sort(res_poles.begin(), res_poles.end(), [](const Pole& x, const Pole& y) { return x.n < y.n; });
  const double t_jost = cfg.tolerance("jost");
  if (search.poles.empty()) {
    skip(rep, "jost_residual", "J+(k_n) = 0", t_jost, "skipped: no poles");
  } else {
    for (const auto& p : io::table_order(search.poles))
      record(rep, "jost_residual/" + std::string(gamow::to_string(p.kind)) + "/n=" + std::to_string(p.n),
             "J+(k_n) = 0", t_jost, [&] { return p.jost_residual; });
  }

  const int needed = std::max(cfg.check.poles, cfg.check.norm_poles);
  const int have = static_cast<int>(res_poles.size());
  const std::string why = have == 0 ? "skipped: no poles" : "skipped: only " + std::to_string(have) + " resonance(s) located";
  std::vector<GamowState> states = parallel_map<GamowState>(
      static_cast<std::size_t>(std::min(needed, have)),
      [&](std::size_t i) { return build_state(scat, res_poles[i], search.poles); });
  auto mirror_state = [&](const GamowState& s) {
    const PoleFinder finder(cfg.potential());
    return build_state(scat, finder.mirror(s.pole()), search.poles);
  };

  // Left and right eigenfunctions: [u(r; z_n*)]* = u(r; z_n).
  const double t_sym = cfg.tolerance("symmetry");
  for (int n = 1; n <= cfg.check.norm_poles; ++n) {
    const std::string name = "symmetry/n=" + std::to_string(n);
    if (n > have) {
      skip(rep, name, "[u(r; z_n*)]* = u(r; z_n)", t_sym, why);
      continue;
    }
    record(rep, name, "[u(r; z_n*)]* = u(r; z_n)", t_sym, [&] {
      const GamowState& s = states[n - 1];
      const GamowState m = mirror_state(s);
      double diff = 0.0, peak = 0.0;
      for (int i = 0; i < 200; ++i) {
        const double r = 3.0 * i / 199.0;
        const cplx u = s(r);
        diff = std::max(diff, std::abs(std::conj(m(r)) - u));
        peak = std::max(peak, std::abs(u));
      }
      return diff / peak;
    });
  }

  const double t_green = cfg.tolerance("green");
  for (int n = 1; n <= 2; ++n) {
    for (std::size_t i = 0; i < cfg.check.green_points.size(); ++i) {
      const auto [r, s] = cfg.check.green_points[i];
      const std::string name = "green_residue/n=" + std::to_string(n) + "/point=" + std::to_string(i);
      if (n > have) {
        skip(rep, name, "res G(r, s; k_n) = u(r) u(s)", t_green, why);
        continue;
      }
      record(rep, name, "res G(r, s; k_n) = u(r) u(s)", t_green, [&, r = r, s = s] {
        const GamowState& st = states[n - 1];
        return rel(green_residue(st, r, s), st(r) * st(s));
      });
    }
  }

  const double t_zel = cfg.tolerance("zeldovich");
  const double t_orth = cfg.tolerance("orthonormality");
  for (int n = 1; n <= cfg.check.norm_poles; ++n) {
    const std::string name = "zeldovich_norm/n=" + std::to_string(n);
    if (n > have) {
      skip(rep, name, "regulated <z_n|z_n> = 1", t_zel, why);
      continue;
    }
    record(rep, name, "regulated <z_n|z_n> = 1", t_zel,
           [&] { return std::abs(zeldovich_norm(states[n - 1]).value - 1.0); });
  }
  for (int n = 1; n <= cfg.check.norm_poles; ++n) {
    for (int m = n + 1; m <= cfg.check.norm_poles; ++m) {
      const std::string name = "orthonormality/n=" + std::to_string(n) + "/m=" + std::to_string(m);
      if (m > have) {
        skip(rep, name, "regulated <z_n|z_m> = 0", t_orth, why);
        continue;
      }
      record(rep, name, "regulated <z_n|z_m> = 0", t_orth,
             [&] { return std::abs(zeldovich_overlap(states[n - 1], states[m - 1]).value); });
    }
  }

  const double t_prop = cfg.tolerance("prop2");
  for (const auto& pname : cfg.check.packets) {
    const WavePacket phi = io::build_packet(cfg.packet(pname));
    for (int n = 1; n <= cfg.check.poles; ++n) {
      const std::string name = "energy_representation/" + pname + "/n=" + std::to_string(n);
      const char* identity = "position pairing = complex delta = residue functional";
      if (n > have) {
        skip(rep, name, identity, t_prop, why);
        continue;
      }
      record(rep, name, identity, t_prop, [&] {
        const GamowState& s = states[n - 1];
        const cplx pos = pair_ket(phi, s);
        const cplx delta = complex_delta_action(scat, phi, s);
        const cplx residue = residue_action(scat, phi, s);
        return std::max({rel(pos, delta), rel(pos, residue), rel(delta, residue)});
      });
    }
  }

  const double t_bw = cfg.tolerance("breit_wigner");
  const char* bw_identity = "regulated Breit-Wigner integral = e^{-+i alpha z} complex delta";
  if (have == 0) {
    skip(rep, "breit_wigner", bw_identity, t_bw, why);
  } else {
    const WavePacket phi = io::build_packet(cfg.packet(cfg.check.packets.empty() ? "P1" : cfg.check.packets.front()));
    const GamowState& s1 = states[0];
    const GamowState anti = mirror_state(s1);
    for (double alpha : cfg.check.alphas) {
      std::ostringstream tag;
      tag << alpha;
      record(rep, "breit_wigner/n=1/alpha=" + tag.str(), bw_identity, t_bw, [&] {
        const cplx bw = breit_wigner_action(scat, phi, s1, alpha, Regulator::decaying_forward);
        return rel(bw, std::exp(-I * alpha * s1.z()) * complex_delta_action(scat, phi, s1));
      });
      record(rep, "breit_wigner/n=-1/alpha=" + tag.str(), bw_identity, t_bw, [&] {
        const cplx bw = breit_wigner_action(scat, phi, anti, alpha, Regulator::decaying_backward);
        return rel(bw, std::exp(I * alpha * anti.z()) * complex_delta_action(scat, phi, anti));
      });
    }
    // A wrong-sign regulator must be refused, not integrated.
    for (const GamowState* s : {&s1, &anti}) {
      CheckEntry e{"regulator_sign/n=" + std::to_string(s->pole().n), "wrong-sign regulator is rejected", 0.0, 0.0, CheckEntry::Status::pass, {}};
      try {
        (void)breit_wigner_action(scat, phi, *s, 0.5,
                                  s == &s1 ? Regulator::decaying_backward : Regulator::decaying_forward);
        e.status = CheckEntry::Status::fail;
        e.residual = 1.0;
        e.detail = "wrong-sign regulator was accepted";
      } catch (const RegulatorSignError& ex) {
        e.detail = ex.what();
      }
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

inline CommandResult cmd_check(const RunConfig& cfg) {
  if (effective_format(cfg, "json") != "json") throw ConfigError("check emits JSON only");
  const CheckReport rep = run_checks(cfg);
  CommandResult res;
  res.output = io::dump(to_json(rep));
  if (!rep.passed()) {
    res.exit_code = exit_check_failed;
    res.message = "failed identities:";
    for (const auto& n : rep.failed()) res.message += "\n  " + n;
  }
  return res;
}

inline CommandResult cmd_expand(const RunConfig& cfg) {
  if (effective_format(cfg, "json") != "json") throw ConfigError("expand emits JSON only");
  const ResonanceExpansion ex = expansion_for(cfg);
  const WavePacket bra = io::build_packet(cfg.packet(cfg.expand.bra), &ex);
  const WavePacket ket = io::build_packet(cfg.packet(cfg.expand.ket), &ex);
  ExpansionOptions opt;
  opt.allow_unregulated = cfg.expand.t == 0.0;
  const ExpansionReport rep = ex.expand(bra, ket, cfg.expand.t, cfg.expand.n_max, opt);
  nlohmann::json j = io::to_json(rep);
  const double tol = cfg.tolerance("expansion");
  j["bra"] = cfg.expand.bra;
  j["ket"] = cfg.expand.ket;
  j["n_max"] = cfg.expand.n_max;
  j["tolerance"] = tol;
  j["within_tolerance"] = rep.residual <= tol;
  CommandResult res;
  res.output = io::dump(j);
  return res;
}

inline CommandResult cmd_survival(const RunConfig& cfg) {
  const ResonanceExpansion ex = expansion_for(cfg);
  const WavePacket phi = io::build_packet(cfg.packet(cfg.survival.packet), &ex);
  const auto times = cfg.survival_times();
  CommandResult res;
  SurvivalCurve curve;
  try {
    curve = ex.survival(phi, times, cfg.survival.fit);
  } catch (const WindowNotFoundError& e) {
    curve = ex.survival(phi, times, false);
    res.exit_code = exit_numerical;
    res.message = std::string(e.what()) + "; curve written without a fit";
  }
  const std::optional<double> gamma1 =
      ex.resonances().empty() ? std::nullopt : std::optional<double>(ex.resonances().front().pole().width());
  std::ostringstream os;
  if (effective_format(cfg, "csv") == "csv") {
    os << "# packet=" << cfg.survival.packet << '\n';
    if (gamma1) os << "# gamma_1=" << io::number(*gamma1) << '\n';
    if (curve.fit) {
      os << "# gamma_fit=" << io::number(curve.fit->gamma_fit) << ",r_squared=" << io::number(curve.fit->r_squared)
         << ",window_t_begin=" << io::number(times[curve.fit->window_begin])
         << ",window_t_end=" << io::number(times[curve.fit->window_end - 1]) << '\n';
      if (curve.fit->outside_r_squared)
        os << "# outside_r_squared=" << io::number(*curve.fit->outside_r_squared)
           << ",deviation=" << (curve.fit->deviation ? 1 : 0) << '\n';
    }
    io::write_survival_csv(os, curve);
  } else {
    nlohmann::json j = io::to_json(curve);
    j["packet"] = cfg.survival.packet;
    j["gamma_1"] = gamma1 ? nlohmann::json(*gamma1) : nlohmann::json(nullptr);
    if (res.exit_code != exit_ok) j["partial"] = true;
    io::write_json(os, j);
  }
  res.output = os.str();
  return res;
}

inline CommandResult cmd_print_config(const RunConfig& cfg) { return {io::dump(to_json(cfg)), exit_ok, {}}; }

/// Runs `command`, translating library exceptions into the exit-code contract.
inline CommandResult run_command(const std::string& command, const RunConfig& cfg) {
  try {
    cfg.validate();
    if (command == "poles") return cmd_poles(cfg);
    if (command == "eigenfunction") return cmd_eigenfunction(cfg);
    if (command == "check") return cmd_check(cfg);
    if (command == "expand") return cmd_expand(cfg);
    if (command == "survival") return cmd_survival(cfg);
    if (command == "print-config") return cmd_print_config(cfg);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    return {{}, exit_config, e.what()};
  } catch (const NoPolesError& e) {
    return {{}, exit_config, e.what()};
  } catch (const BackgroundDivergenceError& e) {
    return {{}, exit_divergence, e.what()};
  } catch (const Error& e) {
    return {{}, exit_numerical, e.what()};
  }
}

}  // namespace gamow

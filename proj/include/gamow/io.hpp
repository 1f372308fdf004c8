#pragma once

// Machine-readable output. JSON numbers are printed with 17 significant digits, so every
// double round-trips exactly and identical results give byte-identical files; CSV uses '.'
// decimals, ',' separators, LF line endings and a mandatory header row.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gamow/config.hpp"
#include "gamow/expansion.hpp"
#include "gamow/poles.hpp"
#include "gamow/states.hpp"

namespace gamow::io {

using nlohmann::json;

/// %.17g; non-finite values have no JSON spelling and become null.
inline std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep integral doubles recognizably floating point.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) { os << json(s).dump(); }

inline void write(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        write_string(os, item.key());
        os << ": ";
        write(os, item.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write(os, j[i], indent, depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float:
      os << number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline void write_json(std::ostream& os, const json& j, int indent = 2) {
  detail::write(os, j, indent, 0);
  os << "\n";
}

inline std::string dump(const json& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

inline void csv_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    first = false;
    os << number(v);
  }
  os << '\n';
}

inline json complex_json(cplx v) { return {{"re", v.real()}, {"im", v.imag()}}; }

inline json to_json(const Pole& p) {
  return {{"n", p.n},
          {"k_re", p.k.real()},
          {"k_im", p.k.imag()},
          {"z_re", p.z.real()},
          {"z_im", p.z.imag()},
          {"gamma", p.width()},
          {"kind", to_string(p.kind)},
          {"jost_residual", p.jost_residual}};
}

/// Poles ordered as the table prints them: resonances by n, then anti-resonances by |n|,
/// then bound and virtual states by n.
inline std::vector<Pole> table_order(std::vector<Pole> poles) {
  auto rank = [](const Pole& p) {
    switch (p.kind) {
      case PoleKind::resonance: return 0;
      case PoleKind::anti_resonance: return 1;
      case PoleKind::bound: return 2;
      case PoleKind::virtual_state: return 3;
    }
    return 4;
  };
  std::stable_sort(poles.begin(), poles.end(), [&](const Pole& x, const Pole& y) {
    if (rank(x) != rank(y)) return rank(x) < rank(y);
    return std::abs(x.n) < std::abs(y.n);
  });
  return poles;
}

inline json pole_table(const std::vector<Pole>& poles) {
  json arr = json::array();
  for (const auto& p : table_order(poles)) arr.push_back(to_json(p));
  return arr;
}

inline json to_json(const GamowState& s) {
  const auto& m = s.coeffs();
  return {{"pole", to_json(s.pole())},
          {"n_sq", complex_json(s.n_sq())},
          {"coefficients",
           {{"q", complex_json(m.q)},
            {"j1", complex_json(m.j1)},
            {"j2", complex_json(m.j2)},
            {"j3", complex_json(m.j3)},
            {"j4", complex_json(m.j4)}}}};
}

inline json to_json(const ExpansionReport& r) {
  json poles = json::array();
  for (const auto& p : r.pole_terms) poles.push_back({{"n", p.n}, {"value", complex_json(p.value)}});
  json bound = json::array();
  cplx bound_sum{};
  for (const auto& p : r.bound_terms) {
    bound.push_back({{"n", p.n}, {"value", complex_json(p.value)}});
    bound_sum += p.value;
  }
  return {{"t", r.t},
          {"n_used", r.n_used},
          {"ray_angle", r.ray_angle},
          {"pole_terms", poles},
          {"bound_terms", bound},
          {"pole_sum", complex_json(r.pole_sum())},
          {"background", complex_json(r.background)},
          {"background_cutoff", r.background_cutoff},
          {"reconstruction", complex_json(r.pole_sum() + r.background + bound_sum)},
          {"direct", complex_json(r.direct)},
          {"residual", r.residual}};
}

/// Natural log of the fitted line at t, or NaN without a fit.
inline double fitted_log(const SurvivalCurve& c, double t) {
  return c.fit ? c.fit->intercept - c.fit->gamma_fit * t : std::nan("");
}

inline json to_json(const SurvivalCurve& c) {
  json fit = nullptr;
  if (c.fit) {
    const auto& f = *c.fit;
    fit = {{"gamma_fit", f.gamma_fit},
           {"intercept", f.intercept},
           {"r_squared", f.r_squared},
           {"window_t_begin", c.times[f.window_begin]},
           {"window_t_end", c.times[f.window_end - 1]},
           {"window_points", f.window_end - f.window_begin},
           {"outside_r_squared", f.outside_r_squared ? json(*f.outside_r_squared) : json(nullptr)},
           {"outside_slope", f.outside_slope ? json(*f.outside_slope) : json(nullptr)},
           {"deviation", f.deviation}};
  }
  return {{"times", c.times}, {"probability", c.probability}, {"fit", fit}};
}

/// t, P(t), fitted line value exp(intercept - gamma t) and whether t lies in the fit window.
inline void write_survival_csv(std::ostream& os, const SurvivalCurve& c) {
  os << "t,probability,fitted,in_window\n";
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const bool inside = c.fit && i >= c.fit->window_begin && i < c.fit->window_end;
    const double fitted = c.fit ? std::exp(fitted_log(c, c.times[i])) : std::nan("");
    os << number(c.times[i]) << ',' << number(c.probability[i]) << ',' << (c.fit ? number(fitted) : "") << ','
       << (inside ? 1 : 0) << '\n';
  }
}

/// Samples u(r; z_n). Comment lines carry k_n and N_n^2 ahead of the column header.
inline void write_eigenfunction_csv(std::ostream& os, const GamowState& s, std::span<const double> radii) {
  os << "# n=" << s.pole().n << '\n';
  os << "# k_re=" << number(s.k().real()) << ",k_im=" << number(s.k().imag()) << '\n';
  os << "# n_sq_re=" << number(s.n_sq().real()) << ",n_sq_im=" << number(s.n_sq().imag()) << '\n';
  os << "r,re_u,im_u,abs_u\n";
  for (double r : radii) {
    const cplx u = s(r);
    csv_row(os, {r, u.real(), u.imag(), std::abs(u)});
  }
}

/// Resolves a configured packet. Resonance-localized packets need the expansion's states
/// and are always L2-normalized.
inline WavePacket build_packet(const PacketSpec& spec, const ResonanceExpansion* expansion = nullptr) {
  if (spec.kind == PacketSpec::Kind::gaussian) {
    WavePacket p(spec.terms);
    return spec.normalize ? p.normalized() : p;
  }
  if (!expansion) throw ConfigError("resonance packets need a located pole set");
  const auto& res = expansion->resonances();
  const auto it = std::find_if(res.begin(), res.end(), [&](const GamowState& s) { return s.pole().n == spec.resonance; });
  if (it == res.end()) throw NoPolesError("no resonance n = " + std::to_string(spec.resonance) + " for the packet");
  return resonance_packet(*it, spec.mu0);
}

}  // namespace gamow::io

#pragma once

// Transition amplitudes <phi_out| e^{-iHt} |phi_in> from the spectral integral, and their
// reconstruction as a sum over resonance poles plus a background integral.
//
// In k (E = k^2) the spectral integrand is
//     h(k) = 2 e^{-i k^2 t} A_out(k) A_in(k) / (pi J+(k) J-(k)),
//     A_out = \int phi_out^* chi,  A_in = \int phi_in chi,
// which is meromorphic with poles at the zeros of J+. Rotating the real half-line
// down to arg k = -theta picks up the resonances with |arg k_n| < theta, each
// contributing e^{-i z_n t} <phi_out|z_n> <z_n|phi_in>.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamow/density.hpp"
#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"
#include "gamow/packets.hpp"
#include "gamow/poles.hpp"
#include "gamow/scattering.hpp"
#include "gamow/spectral.hpp"
#include "gamow/states.hpp"

namespace gamow {

struct PoleTerm {
  int n;
  cplx value;
};

struct ExpansionReport {
  double t = 0.0;
  std::vector<PoleTerm> pole_terms;
  std::vector<PoleTerm> bound_terms;  ///< e^{-iE_b t} <phi_out|b><b|phi_in>; not swept by the rotation
  cplx background{};
  cplx direct{};
  int n_used = 0;
  double residual = 0.0;
  double background_cutoff = 0.0;  ///< |k| at which the background tail was declared converged
  double ray_angle = 0.0;

  cplx pole_sum() const {
    cplx s{};
    for (const auto& p : pole_terms) s += p.value;
    return s;
  }
};

struct ExpansionOptions {
  Tolerance tol{1e-15, 1e-11};
  bool allow_unregulated = false;  ///< permit t = 0 (evaluated along arg k = -pi/8)
};

struct DominanceFit {
  double gamma_fit = 0.0;
  double intercept = 0.0;  ///< log P on the fitted line at t = 0
  double r_squared = 0.0;
  std::size_t window_begin = 0;  ///< index range [begin, end) into the time grid
  std::size_t window_end = 0;
  std::optional<double> outside_r_squared;
  std::optional<double> outside_slope;
  bool deviation = false;
};

struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> probability;
  std::optional<DominanceFit> fit;
};

struct LineFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Least-squares line through (x, y).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("line fit needs at least two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, my - slope * mx, r2};
}

class ResonanceExpansion {
 public:
  /// Keeps the resonances (sorted by index) and the bound states; other kinds are ignored.
  ResonanceExpansion(ShellScattering scat, std::vector<GamowState> states)
      : scat_(std::move(scat)) {
    for (auto& s : states) {
      if (s.pole().kind == PoleKind::resonance) resonances_.push_back(std::move(s));
      else if (s.pole().kind == PoleKind::bound) bound_.push_back(std::move(s));
    }
    std::sort(resonances_.begin(), resonances_.end(),
              [](const GamowState& x, const GamowState& y) { return x.pole().n < y.pole().n; });
  }

  /// Locates poles in `region` and builds their states.
  static ResonanceExpansion for_region(const ShellPotential& pot, const SearchRegion& region) {
    PoleFinder finder(pot);
    return from_search(finder.scattering(), finder.find_poles(region));
  }

  /// Default resonance box plus the bound states of an attractive shell.
  static ResonanceExpansion standard(const ShellPotential& pot) {
    PoleFinder finder(pot);
    return from_search(finder.scattering(), default_pole_search(finder));
  }

  static ResonanceExpansion from_search(const ShellScattering& scat, const PoleSearch& search) {
    if (!search.failures.empty()) throw ConvergenceError("pole search left unresolved cells");
    std::vector<const Pole*> kept;
    for (const auto& p : search.poles)
      if (p.kind == PoleKind::resonance || p.kind == PoleKind::bound) kept.push_back(&p);
    auto states = parallel_map<GamowState>(
        kept.size(), [&](std::size_t i) { return build_state(scat, *kept[i], search.poles); });
    return ResonanceExpansion(scat, std::move(states));
  }

  const ShellScattering& scattering() const { return scat_; }
  const std::vector<GamowState>& resonances() const { return resonances_; }
  const std::vector<GamowState>& bound_states() const { return bound_; }

  /// Real-axis spectral density of (out, in), with the known poles as resolution hints.
  SpectralDensity density(const WavePacket& out, const WavePacket& in, DensityOptions opt = {}) const {
    std::vector<DensityFeature> features;
    for (const auto& s : resonances_) features.push_back({s.k().real(), std::abs(s.k().imag())});
    for (const auto& s : bound_) features.push_back({0.0, std::abs(s.k().imag())});
    return SpectralDensity(scat_, out, in, std::move(features), opt);
  }

  /// <phi_out| e^{-iHt} |phi_in> for each t: the continuum integral along the real k axis
  /// plus the projections onto the bound states this expansion knows about.
  std::vector<cplx> direct_amplitudes(const WavePacket& out, const WavePacket& in, std::span<const double> times,
                                      double tol = 1e-13) const {
    for (double t : times)
      if (!(t >= 0.0)) throw DomainError("direct amplitude needs t >= 0");
    if (times.empty() || out.is_zero() || in.is_zero()) return std::vector<cplx>(times.size());
    DensityOptions opt;
    opt.t_min = *std::min_element(times.begin(), times.end());
    opt.amplitude_tol = tol;
    const SpectralDensity rho = density(out, in, opt);
    std::vector<cplx> amp = rho.amplitudes(times, tol);
    for (const auto& b : bound_) {
      const cplx weight = pair_ket(out, b) * pair_bra(in, b);
      for (std::size_t j = 0; j < times.size(); ++j) amp[j] += std::exp(-I * b.z() * times[j]) * weight;
    }
    return amp;
  }

  cplx direct_amplitude(const WavePacket& out, const WavePacket& in, double t, double tol = 1e-13) const {
    const double ts[1] = {t};
    return direct_amplitudes(out, in, ts, tol)[0];
  }

  /// e^{-i z_n t} <phi_out|z_n> <z_n|phi_in>; t must lie in the state's semigroup half-line.
  static cplx pole_term(const WavePacket& out, const WavePacket& in, const GamowState& s, double t) {
    return evolution_factor(s.pole(), t).value * pair_ket(out, s) * pair_bra(in, s);
  }

  ExpansionReport expand(const WavePacket& out, const WavePacket& in, double t, int n_max,
                         ExpansionOptions opt = {}) const {
    if (n_max < 1) throw DomainError("n_max must be at least 1");
    if (t < 0.0) throw DomainError("expansion needs t >= 0");
    if (t == 0.0 && !opt.allow_unregulated)
      throw DomainError("t = 0 expansion is unregulated; set allow_unregulated");
    ExpansionReport rep;
    rep.t = t;
    rep.ray_angle = t > 0.0 ? pi / 4.0 : pi / 8.0;
    for (const auto& s : resonances_) {
      if (rep.n_used >= n_max) break;
      // Only poles swept by the rotation belong to the sum.
      if (std::abs(std::arg(s.k())) >= rep.ray_angle) continue;
      rep.pole_terms.push_back({s.pole().n, pole_term(out, in, s, t)});
      ++rep.n_used;
    }
    for (const auto& b : bound_) rep.bound_terms.push_back({b.pole().n, pole_term(out, in, b, t)});
    rep.direct = direct_amplitude(out, in, t);
    const auto bg = background(out, in, t, rep.ray_angle, opt.tol);
    rep.background = bg.value;
    rep.background_cutoff = bg.cutoff;
    cplx recon = rep.pole_sum() + rep.background;
    for (const auto& b : rep.bound_terms) recon += b.value;
    rep.residual = std::abs(rep.direct - recon) / std::max(std::abs(rep.direct), 1e-300);
    return rep;
  }

  /// (n = 1 term, everything else) at time t > 0.
  std::pair<cplx, cplx> dominant_pole_split(const WavePacket& phi, double t) const {
    if (!(t > 0.0)) throw DomainError("dominant-pole split needs t > 0");
    if (resonances_.empty()) throw NoPolesError("no resonance to split off");
    const cplx pole1 = pole_term(phi, phi, resonances_.front(), t);
    const cplx direct = direct_amplitude(phi, phi, t);
    return {pole1, direct - pole1};
  }

  SurvivalCurve survival(const WavePacket& phi, std::span<const double> times, bool fit_dominant) const {
    SurvivalCurve curve;
    curve.times.assign(times.begin(), times.end());
    const auto amp = direct_amplitudes(phi, phi, times);
    for (const auto& a : amp) curve.probability.push_back(std::norm(a));
    if (!fit_dominant) return curve;
    if (resonances_.empty()) throw NoPolesError("no resonance to fit against");

    const GamowState& first = resonances_.front();
    const cplx residue1 = pair_ket(phi, first) * pair_bra(phi, first);
    std::vector<bool> dominant(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const cplx pole1 = evolution_factor(first.pole(), times[i]).value * residue1;
      dominant[i] = std::abs(pole1) >= 100.0 * std::abs(amp[i] - pole1);
    }
    std::size_t best_b = 0, best_e = 0;
    for (std::size_t i = 0; i < times.size();) {
      if (!dominant[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < times.size() && dominant[j]) ++j;
      if (j - i > best_e - best_b) {
        best_b = i;
        best_e = j;
      }
      i = j;
    }
    if (best_e - best_b < 3) throw WindowNotFoundError("no window where resonance 1 dominates 100-fold");

    DominanceFit fit;
    fit.window_begin = best_b;
    fit.window_end = best_e;
    std::vector<double> x, y;
    for (std::size_t i = best_b; i < best_e; ++i) {
      x.push_back(times[i]);
      y.push_back(std::log(curve.probability[i]));
    }
    const LineFit inside = fit_line(x, y);
    fit.gamma_fit = -inside.slope;
    fit.intercept = inside.intercept;
    fit.r_squared = inside.r_squared;
    x.clear();
    y.clear();
    for (std::size_t i = best_e; i < times.size(); ++i) {
      x.push_back(times[i]);
      y.push_back(std::log(curve.probability[i]));
    }
    if (x.size() >= 3) {
      const LineFit after = fit_line(x, y);
      fit.outside_r_squared = after.r_squared;
      fit.outside_slope = after.slope;
      const double gamma1 = first.pole().width();
      fit.deviation = after.r_squared < 0.99 || std::abs(-after.slope - gamma1) > 0.05 * gamma1;
    }
    curve.fit = fit;
    return curve;
  }

 private:
  struct Background {
    cplx value;
    double cutoff;
  };

  Background background(const WavePacket& out, const WavePacket& in, double t, double angle, Tolerance tol) const {
    if (out.is_zero() || in.is_zero()) return {{}, 0.0};
    const cplx dir = std::polar(1.0, -angle);
    auto f = [&](double rho) {
      const cplx k = rho * dir;
      return spectral_density(scat_, out, in, k) * std::exp(-I * k * k * t) * dir;
    };
    const double c_min = std::min(out.min_width(), in.min_width());
    const double cap = 50.0 * std::sqrt(1.0 / c_min);
    // Without e^{-ik^2 t} the density decays only like |k|^-4 along the ray and its
    // evaluation noise (cancellation inside the transforms) reaches ~1e-10 near the cap, so
    // the unregulated t = 0 limit runs at tolerances matching its relaxed 1e-2 contract.
    const double tail_rel = t > 0.0 ? 1e-12 : 1e-5;
    if (t == 0.0) tol = {std::max(tol.abs, 1e-9), std::max(tol.rel, 1e-7)};
    const TailResult r = integrate_tail(f, 0.0, 0.25, cap, tol, tail_rel, 1e-300);
    if (!r.converged)
      throw BackgroundDivergenceError("background integral still growing at |k| = " + std::to_string(r.cutoff) +
                                      " (cap " + std::to_string(cap) + "), last total " +
                                      std::to_string(std::abs(r.value)));
    return {r.value, r.cutoff};
  }

  ShellScattering scat_;
  std::vector<GamowState> resonances_;
  std::vector<GamowState> bound_;
};

}  // namespace gamow

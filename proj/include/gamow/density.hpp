#pragma once

// The real-axis spectral density of a packet pair,
//     rho(k) = 2 A_out(k) A_in(k) / (pi J+(k) J-(k)),  A_out = \int phi_out^* chi,  A_in = \int phi_in chi,
// so that <phi_out| e^{-iHt} P_cont |phi_in> = \int_0^inf rho(k) e^{-i k^2 t} dk.
//
// chi'' jumps at r = a and r = b, so rho decays only like k^-6. The density is
// sampled once into a piecewise Chebyshev interpolant on [0, k_max]; each time is
// then integrated from the interpolant up to a cut K(t), and the remainder beyond
// K(t) is the two-term integration-by-parts expansion
//     \int_K^inf rho e^{-ik^2 t} dk = e^{-iK^2 t} [rho/(2itK) + (rho/k)'/((2it)^2 K)] + R,
// accepted only where the next term (the size of R) is below the amplitude tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"
#include "gamow/packets.hpp"
#include "gamow/scattering.hpp"
#include "gamow/spectral.hpp"

namespace gamow {

/// 2 A_out A_in / (pi J+ J-) at wave number k (any k off the zeros of J+ J-).
inline cplx spectral_density(const ShellScattering& scat, const WavePacket& out, const WavePacket& in, cplx k) {
  const JostPair jp = scat.jost(k);
  const cplx a_out = packet_chi_integral(scat, out, k, true);
  const cplx a_in = packet_chi_integral(scat, in, k, false);
  return 2.0 * a_out * a_in / (pi * jp.j_plus * jp.j_minus);
}

/// Polynomial sum_i c_i T_i(x) on [lo, hi], x = (2k - lo - hi) / (hi - lo).
struct ChebyshevPanel {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<cplx> c;

  double to_unit(double k) const { return (2.0 * k - lo - hi) / (hi - lo); }

  cplx operator()(double k) const {
    const double x = to_unit(k);
    cplx b1{}, b2{};
    for (std::size_t i = c.size(); i-- > 1;) {
      const cplx b0 = 2.0 * x * b1 - b2 + c[i];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c[0];
  }

  cplx integral() const {
    cplx s{};
    for (std::size_t i = 0; i < c.size(); i += 2) s += c[i] * (2.0 / (1.0 - static_cast<double>(i * i)));
    return 0.5 * (hi - lo) * s;
  }

  /// Value, first and second k-derivative at k = hi, from T_i(1) = 1, T_i'(1) = i^2,
  /// T_i''(1) = i^2 (i^2 - 1) / 3.
  std::array<cplx, 3> right_jet() const {
    std::array<cplx, 3> d{};
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double n2 = static_cast<double>(i * i);
      d[0] += c[i];
      d[1] += c[i] * n2;
      d[2] += c[i] * (n2 * (n2 - 1.0) / 3.0);
    }
    const double s = 2.0 / (hi - lo);
    d[1] *= s;
    d[2] *= s * s;
    return d;
  }
};

/// Place where the density has structure on a known scale: a pole at Re k = centre
/// whose distance from the real axis is `scale`.
struct DensityFeature {
  double centre;
  double scale;
};

struct DensityOptions {
  double fit_rel = 1e-13;    ///< Chebyshev tail relative to the panel maximum
  double fit_abs = 1e-16;    ///< Chebyshev tail floor relative to the global maximum
  double tail_rel = 1e-12;   ///< bound on \int_{k_max}^inf |rho| relative to \int |rho|
  /// Earliest time the density will be integrated at. For t_min > 0 sampling stops once the
  /// integration-by-parts tail is accurate to amplitude_tol at t_min, usually long before
  /// the t = 0 tail bound is met.
  double t_min = 0.0;
  double amplitude_tol = 1e-13;
  double k_cap = 600.0;
};

class SpectralDensity {
 public:
  static constexpr int order = 24;

  SpectralDensity(const ShellScattering& scat, const WavePacket& out, const WavePacket& in,
                  std::vector<DensityFeature> features = {}, DensityOptions opt = {}, unsigned threads = 0)
      : scat_(scat), out_(out), in_(in), same_(&out == &in), features_(std::move(features)), opt_(opt),
        threads_(threads) {
    if (out.is_zero() || in.is_zero()) return;
    build();
  }

  bool empty() const { return panels_.empty(); }
  double k_max() const { return panels_.empty() ? 0.0 : panels_.back().hi; }
  /// Upper bound on \int_{k_max}^inf |rho| assuming |rho| k^6 stays below its last-panel maximum.
  double tail_bound() const { return tail_bound_; }
  double mass() const { return mass_; }
  const std::vector<ChebyshevPanel>& panels() const { return panels_; }

  /// Interpolated density; zero beyond k_max.
  cplx operator()(double k) const {
    if (panels_.empty() || k < 0.0 || k > k_max()) return {};
    auto it = std::lower_bound(panels_.begin(), panels_.end(), k, [](const auto& p, double x) { return p.hi < x; });
    return (*it)(k);
  }

  /// Density evaluated from the transforms, bypassing the interpolant.
  cplx exact(double k) const {
    if (!same_) return spectral_density(scat_, out_, in_, cplx{k, 0.0});
    // chi is real on the real axis, so A_out = conj(A_in) when both packets coincide.
    const JostPair jp = scat_.jost(cplx{k, 0.0});
    const cplx a = packet_chi_integral(scat_, in_, cplx{k, 0.0}, false);
    return 2.0 * std::norm(a) / (pi * jp.j_plus * jp.j_minus);
  }

  /// \int_0^inf rho(k) e^{-i k^2 t} dk with absolute error target `tol`. Times below the
  /// t_min the density was built for fall back on the cruder truncation at k_max.
  cplx amplitude(double t, double tol = 1e-13) const {
    if (!(t >= 0.0)) throw DomainError("amplitude needs t >= 0");
    if (panels_.empty()) return {};
    if (t == 0.0) {
      cplx s{};
      for (const auto& p : panels_) s += p.integral();
      return s;
    }
    const Cut cut = choose_cut(t, tol);
    cplx s{};
    for (std::size_t i = 0; i <= cut.panel; ++i) s += oscillatory(panels_[i], t);
    return s + cut.remainder;
  }

  std::vector<cplx> amplitudes(std::span<const double> times, double tol = 1e-13) const {
    return parallel_map<cplx>(times.size(), [&](std::size_t i) { return amplitude(times[i], tol); }, threads_);
  }

 private:
  struct Cut {
    std::size_t panel;
    cplx remainder;
  };

  static const std::array<double, order>& unit_nodes() {
    static const std::array<double, order> x = [] {
      std::array<double, order> v{};
      for (int j = 0; j < order; ++j) v[j] = std::cos(pi * (j + 0.5) / order);
      return v;
    }();
    return x;
  }

  struct Fit {
    ChebyshevPanel panel;
    double peak;       ///< max |rho| at the nodes
    double mass;       ///< Gauss-Chebyshev estimate of \int |rho|
    double peak_k6;    ///< max |rho| k^6 at the nodes
  };

  Fit sample(double lo, double hi) const {
    const auto& x = unit_nodes();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const auto f = parallel_map<cplx>(order, [&](std::size_t j) { return exact(mid + half * x[j]); }, threads_);
    Fit fit{{lo, hi, std::vector<cplx>(order)}, 0.0, 0.0, 0.0};
    for (int i = 0; i < order; ++i) {
      cplx s{};
      for (int j = 0; j < order; ++j) s += f[j] * std::cos(pi * i * (j + 0.5) / order);
      fit.panel.c[i] = s * (2.0 / order);
    }
    fit.panel.c[0] *= 0.5;
    for (int j = 0; j < order; ++j) {
      const double m = std::abs(f[j]);
      const double k = mid + half * x[j];
      fit.peak = std::max(fit.peak, m);
      fit.peak_k6 = std::max(fit.peak_k6, m * std::pow(k, 6));
      fit.mass += m * std::sqrt(1.0 - x[j] * x[j]);
    }
    fit.mass *= half * pi / order;
    return fit;
  }

  // Adaptive bisection of [lo, hi] until every Chebyshev tail is negligible.
  // Returns the number of panels it produced.
  std::size_t refine(double lo, double hi, double& last_peak_k6) {
    const std::size_t before = panels_.size();
    std::vector<std::pair<double, double>> stack{{lo, hi}};
    while (!stack.empty()) {
      auto [a, b] = stack.back();
      stack.pop_back();
      Fit fit = sample(a, b);
      global_peak_ = std::max(global_peak_, fit.peak);
      const auto& c = fit.panel.c;
      const double tail = std::abs(c[order - 1]) + std::abs(c[order - 2]) + std::abs(c[order - 3]);
      if (tail <= std::max(opt_.fit_rel * fit.peak, opt_.fit_abs * global_peak_)) {
        panels_.push_back(std::move(fit.panel));
        mass_ += fit.mass;
        last_peak_k6 = fit.peak_k6;
        continue;
      }
      if (b - a < 1e-9 * (1.0 + b)) throw ConvergenceError("spectral density is not resolvable near k = " + std::to_string(a));
      const double m = 0.5 * (a + b);
      // Left half last so it is processed first and panels stay sorted.
      stack.push_back({m, b});
      stack.push_back({a, m});
    }
    return panels_.size() - before;
  }

  // Top-level edges: unit steps, refined geometrically toward every known feature.
  std::vector<double> initial_edges(double upto) const {
    std::vector<double> e;
    for (double x = 0.0; x <= upto; x += 1.0) e.push_back(x);
    for (const auto& f : features_) {
      if (!(f.scale > 0.0) || f.centre > upto) continue;
      const double c = std::max(f.centre, 0.0);
      e.push_back(c);
      for (double d = f.scale; d < 1.0; d *= 4.0) {
        e.push_back(c + d);
        if (c - d > 0.0) e.push_back(c - d);
      }
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end(), [](double p, double q) { return q - p < 1e-12; }), e.end());
    return e;
  }

  void build() {
    double floor_k = 5.0;
    for (const auto& f : features_) floor_k = std::max(floor_k, f.centre + 10.0 * f.scale);
    const std::vector<double> edges = initial_edges(floor_k + 1.0);
    double last_peak_k6 = 0.0;
    double lo = 0.0;
    double step = 1.0;
    std::size_t next = 1;
    while (true) {
      const bool seeded = next < edges.size();
      const double hi = seeded ? edges[next++] : lo + step;
      const std::size_t made = refine(lo, hi, last_peak_k6);
      // Past the seeded edges the step widens while whole panels pass and narrows when they split.
      if (!seeded) step = made == 1 ? std::min(2.0 * step, 4.0) : std::max(0.5 * step, 0.25);
      lo = hi;
      if (hi >= floor_k) {
        tail_bound_ = last_peak_k6 / (5.0 * std::pow(hi, 5));
        if (tail_bound_ <= opt_.tail_rel * mass_) return;
        if (opt_.t_min > 0.0 && std::abs(ibp_terms(panels_.back(), opt_.t_min)[2]) <= 0.1 * opt_.amplitude_tol) return;
      }
      if (hi >= opt_.k_cap)
        throw ConvergenceError("spectral density has not decayed by k = " + std::to_string(opt_.k_cap));
    }
  }

  // \int_lo^hi p(k) e^{-ik^2 t} dk with Gauss-Legendre on sub-panels spanning at most pi in phase.
  static cplx oscillatory(const ChebyshevPanel& p, double t) {
    using rule = boost::math::quadrature::gauss<double, 30>;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    const double span = 2.0 * p.hi * t * (p.hi - p.lo);
    const int subs = std::max(1, static_cast<int>(std::ceil(span / pi)));
    const double h = (p.hi - p.lo) / subs;
    cplx total{};
    for (int s = 0; s < subs; ++s) {
      const double mid = p.lo + (s + 0.5) * h;
      const double half = 0.5 * h;
      cplx part{};
      for (std::size_t i = 0; i < x.size(); ++i) {
        // An even-order rule stores only the positive abscissae.
        for (double sign : {1.0, -1.0}) {
          const double k = mid + sign * half * x[i];
          part += w[i] * p(k) * std::exp(-I * (k * k * t));
        }
      }
      total += part * half;
    }
    return total;
  }

  // Terms of the integration-by-parts expansion of \int_K^inf at K = p.hi.
  static std::array<cplx, 3> ibp_terms(const ChebyshevPanel& p, double t) {
    const auto [f, f1, f2] = p.right_jet();
    const double k = p.hi;
    const cplx it2 = 2.0 * I * t;
    const cplx g1 = f1 / k - f / (k * k);                                   // (rho/k)'
    const cplx g2 = f2 / (k * k) - 3.0 * f1 / (k * k * k) + 3.0 * f / std::pow(k, 4);  // ((rho/k)'/k)'
    const cplx phase = std::exp(-I * (k * k * t));
    return {phase * f / (it2 * k), phase * g1 / (it2 * it2 * k), phase * g2 / (it2 * it2 * it2 * k)};
  }

  Cut choose_cut(double t, double tol) const {
    // Poles near the axis whose e^{Im z t} is not yet negligible must lie inside the cut.
    double floor_k = 0.0;
    for (const auto& f : features_)
      if (2.0 * std::max(f.centre, 0.0) * f.scale * t < 40.0) floor_k = std::max(floor_k, f.centre + 10.0 * f.scale);
    for (std::size_t i = 0; i < panels_.size(); ++i) {
      const ChebyshevPanel& p = panels_[i];
      if (p.hi < floor_k || p.hi <= 0.0) continue;
      const auto terms = ibp_terms(p, t);
      if (std::abs(terms[2]) <= tol && std::abs(terms[1]) <= std::abs(terms[0]))
        return {i, terms[0] + terms[1]};
    }
    // Past k_max the density is bounded by tail_bound; use the expansion only if it is sharper.
    const auto terms = ibp_terms(panels_.back(), t);
    if (std::abs(terms[2]) <= tail_bound_) return {panels_.size() - 1, terms[0] + terms[1]};
    return {panels_.size() - 1, {}};
  }

  ShellScattering scat_;
  WavePacket out_;
  WavePacket in_;
  bool same_;  ///< out and in are the same object
  std::vector<DensityFeature> features_;
  DensityOptions opt_;
  unsigned threads_;
  std::vector<ChebyshevPanel> panels_;
  double global_peak_ = 0.0;
  double mass_ = 0.0;
  double tail_bound_ = 0.0;
};

}  // namespace gamow

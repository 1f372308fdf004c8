#pragma once

// Test functions: sums of A r^p exp(-c (r - r0)^2) with p in {1,2,3} and c > 1,
// optionally plus shaped terms whose envelope is bounded by
// scale * exp(growth r - width r^2). Every packet vanishes at r = 0.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"

namespace gamow {

struct GaussianTerm {
  cplx amplitude;
  int power;     ///< p in {1, 2, 3}
  double width;  ///< c, must exceed 1
  double centre; ///< r0
};

/// Term outside the Gaussian family. `profile` must vanish at 0 and satisfy
/// |profile(r)| <= scale * exp(growth * r - width * r^2) for all r >= 0.
struct ShapedTerm {
  std::function<cplx(double)> profile;
  double width;
  double growth;
  double scale;
};

class WavePacket {
 public:
  /// Ratio between the certified |Im q| range and sqrt(min c).
  static constexpr double certificate_factor = 6.0;
  /// R_cut is where the envelope (times any exponential growth) drops this far below its peak.
  static constexpr double cutoff_ratio = 1e-18;
  static constexpr double max_cutoff = 400.0;

  WavePacket() = default;

  explicit WavePacket(std::vector<GaussianTerm> terms, std::vector<ShapedTerm> shaped = {})
      : terms_(std::move(terms)), shaped_(std::move(shaped)) {
    for (const auto& t : terms_) {
      if (t.power < 1 || t.power > 3) throw DomainError("packet term power must be 1, 2 or 3");
      if (!(t.width > 1.0) || !std::isfinite(t.width))
        throw DomainError("packet term width c must exceed 1 for the falloff certificate");
      if (!std::isfinite(t.centre) || !std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag()))
        throw DomainError("packet term parameters must be finite");
    }
    for (const auto& s : shaped_) {
      if (!(s.width > 0.0)) throw DomainError("shaped term needs a positive Gaussian width");
      if (!s.profile) throw DomainError("shaped term needs a profile");
    }
  }

  const std::vector<GaussianTerm>& terms() const { return terms_; }
  const std::vector<ShapedTerm>& shaped() const { return shaped_; }

  bool is_zero() const {
    return shaped_.empty() && std::all_of(terms_.begin(), terms_.end(),
                                          [](const auto& t) { return t.amplitude == cplx{}; });
  }

  cplx operator()(double r) const {
    cplx v{};
    for (const auto& t : terms_) v += t.amplitude * std::pow(r, t.power) * std::exp(-t.width * sq(r - t.centre));
    for (const auto& s : shaped_) v += s.profile(r);
    return v;
  }

  double min_width() const {
    double c = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) c = std::min(c, t.width);
    for (const auto& s : shaped_) c = std::min(c, s.width);
    return c;
  }

  double max_width() const {
    double c = 0.0;
    for (const auto& t : terms_) c = std::max(c, t.width);
    for (const auto& s : shaped_) c = std::max(c, s.width);
    return c;
  }

  /// Largest |Im q| at which energy transforms of this packet are certified.
  double certificate() const {
    const double c = min_width();
    return std::isfinite(c) ? certificate_factor * std::sqrt(c) : std::numeric_limits<double>::infinity();
  }

  /// Upper bound on |phi(r)|.
  double envelope(double r) const {
    double e = 0.0;
    for (const auto& t : terms_) e += std::abs(t.amplitude) * std::pow(r, t.power) * std::exp(-t.width * sq(r - t.centre));
    for (const auto& s : shaped_) e += s.scale * std::exp(s.growth * r - s.width * r * r);
    return e;
  }

  /// Radius beyond which envelope(r) e^{growth r} stays below cutoff_ratio times its peak.
  double cutoff(double growth) const {
    if (is_zero()) return 0.0;
    constexpr double step = 0.05;
    double peak = 0.0;
    double r = 0.0;
    double prev = 0.0;
    double last_rise = 0.0;
    // Scan outward; the log-envelope of every term is eventually concave and decreasing.
    while (r <= max_cutoff) {
      const double v = envelope(r) * std::exp(growth * r);
      if (v > peak) peak = v;
      if (v >= prev) last_rise = r;
      prev = v;
      if (r > last_rise && peak > 0.0 && v < cutoff_ratio * peak && r > max_centre()) return r;
      r += step;
    }
    throw FalloffError("packet falloff cannot dominate growth e^{" + std::to_string(growth) + " r} within r <= " +
                       std::to_string(max_cutoff));
  }

  /// Points where the integrand may change character (term centres), for quadrature splitting.
  std::vector<double> centres() const {
    std::vector<double> c;
    for (const auto& t : terms_)
      if (t.centre > 0.0) c.push_back(t.centre);
    return c;
  }

  WavePacket conjugated() const {
    WavePacket out = *this;
    for (auto& t : out.terms_) t.amplitude = std::conj(t.amplitude);
    for (auto& s : out.shaped_) {
      auto f = s.profile;
      s.profile = [f](double r) { return std::conj(f(r)); };
    }
    return out;
  }

  WavePacket scaled(cplx factor) const {
    WavePacket out = *this;
    for (auto& t : out.terms_) t.amplitude *= factor;
    for (auto& s : out.shaped_) {
      auto f = s.profile;
      s.profile = [f, factor](double r) { return factor * f(r); };
      s.scale *= std::abs(factor);
    }
    return out;
  }

  double norm() const {
    if (is_zero()) return 0.0;
    const double rc = cutoff(0.0);
    auto f = [this](double r) { return cplx{std::norm((*this)(r)), 0.0}; };
    return std::sqrt(integrate_pieces(f, breakpoints(rc)).real());
  }

  WavePacket normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw DomainError("cannot normalize a zero packet");
    return scaled(1.0 / n);
  }

  /// Sorted quadrature breakpoints in [0, rc], including the term centres and `extra`.
  std::vector<double> breakpoints(double rc, std::initializer_list<double> extra = {}) const {
    std::vector<double> pts{0.0, rc};
    for (double c : centres())
      if (c < rc) pts.push_back(c);
    for (double e : extra)
      if (e > 0.0 && e < rc) pts.push_back(e);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  /// Sum of adaptive integrals of f over consecutive breakpoint intervals.
  template <class F>
  static cplx integrate_pieces(F&& f, const std::vector<double>& pts, Tolerance tol = {1e-15, 1e-12}) {
    cplx total{};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate(f, pts[i], pts[i + 1], tol).value;
    return total;
  }

 private:
  static double sq(double x) { return x * x; }

  double max_centre() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, t.centre);
    return m;
  }

  std::vector<GaussianTerm> terms_;
  std::vector<ShapedTerm> shaped_;
};

/// The three fixture packets P1, P2, P3, each L2-normalized.
inline WavePacket standard_packet(int which) {
  switch (which) {
    case 1: return WavePacket({{1.0, 1, 2.0, 1.5}}).normalized();
    case 2: return WavePacket({{1.0, 2, 3.0, 1.0}}).normalized();
    case 3: return WavePacket({{1.0, 1, 2.0, 1.5}, {-0.5, 1, 4.0, 2.5}}).normalized();
    default: throw DomainError("standard packets are numbered 1 to 3");
  }
}

}  // namespace gamow

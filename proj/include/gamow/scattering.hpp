#pragma once

// s-wave scattering off the spherical shell V(r) = v0 on a < r < b, zero elsewhere,
// in units hbar = 2m = 1 (so E = k^2). Everything is a closed-form transfer of
// (value, derivative) pairs across the two region boundaries.
//
// Jost convention: for r > b the regular solution is
//     chi(r;k) = (i/2) [ J+(k) e^{-ikr} - J-(k) e^{ikr} ],
// so S(k) = J-(k)/J+(k) and resonances are the zeros of J+ with Im k < 0.

#include <cmath>
#include <complex>
#include <string>

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"

namespace gamow {

class ShellPotential {
 public:
  ShellPotential(double a, double b, double v0) : a_(a), b_(b), v0_(v0) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(v0))
      throw DomainError("shell parameters must be finite");
    if (!(a > 0.0)) throw DomainError("a must be positive");
    if (!(b > a)) throw DomainError("b must exceed a");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double v0() const { return v0_; }
  double width() const { return b_ - a_; }

  double operator()(double r) const { return (r > a_ && r < b_) ? v0_ : 0.0; }

 private:
  double a_;
  double b_;
  double v0_;
};

struct JostPair {
  cplx j_plus;
  cplx j_minus;
  cplx k;
};

/// Piecewise coefficients at wave number k:
///   r < a      chi = sin(kr)
///   a < r < b  chi = j1 e^{iqr} + j2 e^{-iqr},   q = sqrt(k^2 - v0)
///   r > b      chi = j3 e^{ikr} + j4 e^{-ikr},   j3 = -(i/2) J-,  j4 = (i/2) J+
/// At a zero of J+ only j3 survives, which is the purely outgoing form.
struct MatchingCoefficients {
  cplx j1;
  cplx j2;
  cplx j3;
  cplx j4;
  cplx q;
};

/// Value and r-derivative of a radial function at one point.
struct RadialPoint {
  cplx value;
  cplx derivative;
};

enum class QBranch { principal, negated };

namespace detail {

// sin(q d)/q, even in q and finite at q = 0.
inline cplx sin_over(cplx q, double d) {
  const cplx x = q * d;
  if (std::abs(x) < 1e-3) {
    const cplx x2 = x * x;
    return d * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(x) / q;
}

// Propagates (f, f') by distance d through a region where f'' = -q2 f.
// Depends on q only through q^2 and q sin(qd), so the branch of q never matters.
inline RadialPoint propagate(RadialPoint p, cplx q2, cplx q, double d) {
  const cplx c = std::cos(q * d);
  const cplx s = sin_over(q, d);
  return {p.value * c + p.derivative * s, -q2 * s * p.value + p.derivative * c};
}

}  // namespace detail

class ShellScattering {
 public:
  /// |J+(k)| below this marks k as a zero of J+ for the purpose of PoleError.
  static double pole_threshold(cplx k) { return 1e-13 * (1.0 + std::abs(k)); }

  explicit ShellScattering(ShellPotential potential) : pot_(potential) {}

  const ShellPotential& potential() const { return pot_; }

  cplx shell_q(cplx k, QBranch branch = QBranch::principal) const {
    const cplx q = std::sqrt(k * k - pot_.v0());
    return branch == QBranch::principal ? q : -q;
  }

  /// chi and chi' at r, with chi(0) = 0, chi'(0) = k.
  RadialPoint regular(double r, cplx k, QBranch branch = QBranch::principal) const {
    if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
    const double a = pot_.a();
    const double b = pot_.b();
    if (r <= a) return {std::sin(k * r), k * std::cos(k * r)};
    const RadialPoint at_a{std::sin(k * a), k * std::cos(k * a)};
    const cplx q2 = k * k - pot_.v0();
    const cplx q = shell_q(k, branch);
    if (r <= b) return detail::propagate(at_a, q2, q, r - a);
    const RadialPoint at_b = detail::propagate(at_a, q2, q, b - a);
    return detail::propagate(at_b, k * k, k, r - b);
  }

  cplx regular_solution(double r, cplx k) const { return regular(r, k).value; }

  /// Outgoing solution: e^{ikr} for r >= b, continued inward.
  RadialPoint outgoing(double r, cplx k) const {
    if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
    const double a = pot_.a();
    const double b = pot_.b();
    if (r >= b) {
      const cplx e = std::exp(I * k * r);
      return {e, I * k * e};
    }
    const cplx eb = std::exp(I * k * b);
    const RadialPoint at_b{eb, I * k * eb};
    const cplx q2 = k * k - pot_.v0();
    const cplx q = shell_q(k);
    if (r >= a) return detail::propagate(at_b, q2, q, r - b);
    const RadialPoint at_a = detail::propagate(at_b, q2, q, a - b);
    return detail::propagate(at_a, k * k, k, r - a);
  }

  JostPair jost(cplx k, QBranch branch = QBranch::principal) const {
    if (k == cplx{}) throw DomainError("jost function is not evaluated at k = 0");
    // Without a shell chi = sin(kr) exactly; the transfer would only add rounding growth off the axis.
    if (pot_.v0() == 0.0) return {1.0, 1.0, k};
    const RadialPoint at_b = regular(pot_.b(), k, branch);
    const cplx ikb = I * k * pot_.b();
    const cplx ratio = at_b.derivative / k;
    return {std::exp(ikb) * (ratio - I * at_b.value), std::exp(-ikb) * (ratio + I * at_b.value), k};
  }

  cplx jost_plus(cplx k) const { return jost(k).j_plus; }

  /// dJ+/dk by central difference with step 1e-6 (1 + |k|).
  cplx jost_plus_derivative(cplx k) const {
    const double h = 1e-6 * (1.0 + std::abs(k));
    return central_difference([this](cplx x) { return jost_plus(x); }, k, h);
  }

  MatchingCoefficients matching(cplx k, QBranch branch = QBranch::principal) const {
    const JostPair jp = jost(k, branch);
    const double a = pot_.a();
    const cplx q = shell_q(k, branch);
    const cplx chi_a = std::sin(k * a);
    const cplx dchi_a = k * std::cos(k * a);
    const cplx slope = dchi_a / (I * q);
    return {0.5 * (chi_a + slope) * std::exp(-I * q * a), 0.5 * (chi_a - slope) * std::exp(I * q * a),
            -0.5 * I * jp.j_minus, 0.5 * I * jp.j_plus, q};
  }

  /// chi(r) assembled from matching coefficients rather than by transfer.
  static cplx assemble(const MatchingCoefficients& m, const ShellPotential& pot, double r, cplx k) {
    if (r <= pot.a()) return std::sin(k * r);
    if (r <= pot.b()) return m.j1 * std::exp(I * m.q * r) + m.j2 * std::exp(-I * m.q * r);
    return m.j3 * std::exp(I * k * r) + m.j4 * std::exp(-I * k * r);
  }

  cplx s_matrix(cplx k) const {
    const JostPair jp = jost(k);
    if (std::abs(jp.j_plus) < pole_threshold(k))
      throw PoleError("S-matrix requested at a zero of the Jost function");
    return jp.j_minus / jp.j_plus;
  }

  /// Resolvent kernel (z - H)^{-1}(r, s) at z = k^2, Im k > 0 physical sheet,
  /// continued meromorphically elsewhere: -chi(r<) f(r>) / (k J+).
  cplx green_function(double r, double s, cplx k) const {
    if (!(r >= 0.0) || !(s >= 0.0)) throw DomainError("radius must be non-negative");
    const cplx jp = jost(k).j_plus;
    if (std::abs(jp) < pole_threshold(k)) throw PoleError("Green function requested at a zero of J+");
    const double lesser = std::min(r, s);
    const double greater = std::max(r, s);
    return -regular(lesser, k).value * outgoing(greater, k).value / (k * jp);
  }

 private:
  ShellPotential pot_;
};

}  // namespace gamow

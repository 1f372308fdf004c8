#pragma once

// Energy representation of wave packets and the functionals that represent Gamow
// kets in it. With the delta-in-E normalized kernels chi(r;q) / (sqrt(pi q) J(q)),
//
//   transform(phi, plus,  q) = \int phi chi(r;q) dr / (sqrt(pi q) J-(q))
//   transform(phi, minus, q) = \int phi chi(r;q) dr / (sqrt(pi q) J+(q))
//
// both analytic in q. The continued "conjugate" representation used by the
// Gamow functionals is [transform(phi, sign, q*)]*, which carries 1/J- for the
// minus family (regular at resonances) and 1/J+ for the plus family (simple
// poles at resonances).

#include <cmath>
#include <complex>
#include <vector>

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"
#include "gamow/packets.hpp"
#include "gamow/scattering.hpp"
#include "gamow/states.hpp"

namespace gamow {

enum class Family { plus, minus };
enum class Regulator { decaying_forward, decaying_backward };  ///< e^{-iE alpha} and e^{+iE alpha}

/// \int w(phi(r)) chi(r; q) dr, with w = conj when `conjugate`. No certificate check.
inline cplx packet_chi_integral(const ShellScattering& scat, const WavePacket& phi, cplx q, bool conjugate) {
  if (phi.is_zero()) return {};
  const ShellPotential& pot = scat.potential();
  const double rc = phi.cutoff(std::abs(q.imag()));
  auto f = [&](double r) {
    const cplx p = phi(r);
    return (conjugate ? std::conj(p) : p) * scat.regular(r, q).value;
  };
  return WavePacket::integrate_pieces(f, phi.breakpoints(rc, {pot.a(), pot.b()}));
}

/// phi-hat^{+-} at wave number q (energy q^2), continued off the real axis.
inline cplx transform(const ShellScattering& scat, const WavePacket& phi, Family family, cplx q) {
  if (std::abs(q.imag()) > phi.certificate())
    throw CertificateError("|Im q| exceeds the packet's certified range");
  if (phi.is_zero()) return {};
  const JostPair jp = scat.jost(q);
  const cplx denom_jost = family == Family::plus ? jp.j_minus : jp.j_plus;
  if (std::abs(denom_jost) < ShellScattering::pole_threshold(q))
    throw PoleError("transform continued onto a zero of its Jost denominator");
  return packet_chi_integral(scat, phi, q, false) / (std::sqrt(pi * q) * denom_jost);
}

/// [phi-hat^-(z*)]* as an analytic function of q, for q in the right half plane.
/// Internal paths use this without the certificate; it equals
/// conj(transform(phi, minus, conj(q))) wherever both are defined.
inline cplx minus_continuation(const ShellScattering& scat, const WavePacket& phi, cplx q) {
  if (phi.is_zero()) return {};
  const cplx jm = scat.jost(q).j_minus;
  return packet_chi_integral(scat, phi, q, true) / (std::sqrt(pi * q) * jm);
}

/// Same function continued into the third quadrant through the lower half plane,
/// evaluated at q = -conj(k) for k in the closed fourth quadrant. Uses the reflection
/// F_phi(-k*) = conj(i F_{phi*}(k)), which stays off the square-root cut.
inline cplx minus_continuation_mirrored(const ShellScattering& scat, const WavePacket& phi, cplx k) {
  return std::conj(I * minus_continuation(scat, phi.conjugated(), k));
}

/// Normalization of the energy-representation Gamow functionals: sqrt(2 k_n) N_n.
inline cplx energy_normalization(const GamowState& s) { return std::sqrt(2.0 * s.k()) * s.n_factor(); }

/// i sqrt(2 pi) N_n [phi-hat^-(z_n*)]*.
inline cplx complex_delta_action(const ShellScattering& scat, const WavePacket& phi, const GamowState& s) {
  if (s.pole().kind != PoleKind::resonance && s.pole().kind != PoleKind::anti_resonance)
    throw DomainError("complex delta functional is defined for resonances and anti-resonances");
  if (phi.is_zero()) return {};
  const cplx hat = transform(scat, phi, Family::minus, std::conj(s.k()));
  return I * std::sqrt(2.0 * pi) * energy_normalization(s) * std::conj(hat);
}

/// -sqrt(2 pi)/N_n res_{z=z_n} [phi-hat^+(z*)]*, residue by contour quadrature in k.
inline cplx residue_action(const ShellScattering& scat, const WavePacket& phi, const GamowState& s) {
  if (s.pole().kind != PoleKind::resonance && s.pole().kind != PoleKind::anti_resonance)
    throw DomainError("residue functional is defined for resonances and anti-resonances");
  if (phi.is_zero()) return {};
  auto f = [&](cplx q) { return std::conj(transform(scat, phi, Family::plus, std::conj(q))) * 2.0 * q; };
  const cplx res = contour_residue(f, s.k(), s.contour_radius(), 1e-8).value;
  return -std::sqrt(2.0 * pi) / energy_normalization(s) * res;
}

struct BreitWignerPath {
  double ray_angle;  ///< the E < 0 half-line is taken along arg k = -ray_angle
};

/// Ray angle for the negative-energy half of the Breit-Wigner integral.
///
/// The packet transform grows at most like exp(-Re(q^2)/(4c)); with the regulator the
/// integrand decays along arg k = -theta iff gamma cos(2 theta) + alpha sin(2 theta) > 0,
/// gamma = 1/(4 c_min). The ray must also pass below the pole, theta > |arg k_n|.
inline BreitWignerPath breit_wigner_path(const WavePacket& phi, cplx k_res, double alpha) {
  const double gamma = 1.0 / (4.0 * phi.min_width());
  const double eta = std::atan2(alpha, gamma);
  const double upper = 0.5 * (eta + 0.5 * pi);
  const double lower = std::abs(std::arg(k_res));
  if (!(lower < upper)) throw DomainError("regulator too weak to pass below the pole");
  return {0.5 * (lower + upper)};
}

/// \int dE e^{-+iE alpha} (-+N_n/sqrt(2 pi)) [phi-tilde^-(E)]* / (E - z_n) over the whole
/// real line of the second sheet. E > 0 runs along the real k axis; E < 0 along a rotated
/// ray in the fourth quadrant (third for anti-resonances), which is the Abel-regularized
/// value of the negative-energy half.
inline cplx breit_wigner_action(const ShellScattering& scat, const WavePacket& phi, const GamowState& s,
                                double alpha, Regulator regulator, Tolerance tol = {1e-15, 1e-10}) {
  if (!(alpha > 0.0)) throw DomainError("regulator strength alpha must be positive");
  const PoleKind kind = s.pole().kind;
  if (kind != PoleKind::resonance && kind != PoleKind::anti_resonance)
    throw DomainError("Breit-Wigner functional is defined for resonances and anti-resonances");
  const bool anti = kind == PoleKind::anti_resonance;
  if (anti != (regulator == Regulator::decaying_backward))
    throw RegulatorSignError(anti ? "anti-resonances need the regulator e^{+iE alpha}"
                                  : "resonances need the regulator e^{-iE alpha}");
  if (phi.is_zero()) return {};

  // Parametrize by k in the fourth quadrant; for anti-resonances q = -conj(k).
  const cplx k_ref = anti ? -std::conj(s.k()) : s.k();
  const double theta = breit_wigner_path(phi, k_ref, alpha).ray_angle;
  const cplx z = s.z();
  auto integrand = [&](cplx k, cplx dk) -> cplx {
    if (!anti) {
      const cplx e = k * k;
      return 2.0 * k * dk * std::exp(-I * e * alpha) * minus_continuation(scat, phi, k) / (e - z);
    }
    const cplx q = -std::conj(k);
    const cplx dq = -std::conj(dk);
    const cplx e = q * q;
    return 2.0 * q * dq * std::exp(I * e * alpha) * minus_continuation_mirrored(scat, phi, k) / (e - z);
  };

  const double c_min = phi.min_width();
  const double ray_cap = 60.0 * std::sqrt(1.0 / std::min(c_min, 1.0)) + 2.0 * std::abs(k_ref);
  // On the real axis the transform decays only algebraically (chi'' jumps at a and b),
  // so the axis tail runs further and stops at a looser relative threshold.
  const double axis_cap = 10.0 * ray_cap;
  auto on_axis = [&](double x) { return integrand(cplx{x, 0.0}, 1.0); };
  const cplx dir = std::polar(1.0, -theta);
  auto on_ray = [&](double x) { return integrand(x * dir, dir); };

  const double peak = k_ref.real();
  cplx axis = integrate(on_axis, 0.0, peak, tol).value;
  const TailResult axis_tail = integrate_tail(on_axis, peak, 0.5, axis_cap, tol, 1e-9, 1e-300);
  axis += axis_tail.value;
  const TailResult ray = integrate_tail(on_ray, 0.0, 0.5, ray_cap, tol, 1e-15, 1e-300);
  if (!axis_tail.converged || !ray.converged)
    throw ConvergenceError("Breit-Wigner integral did not reach its tail cutoff");
  const cplx prefactor = (anti ? 1.0 : -1.0) * energy_normalization(s) / std::sqrt(2.0 * pi);
  return prefactor * (axis - ray.value);
}

}  // namespace gamow

#pragma once

// Normalized Gamow eigenfunctions u(r; z_n) of the shell, with N_n^2 = i res_{q=k_n} S(q).
//   r <= b  u = (2i N_n / J-(k_n)) chi(r; k_n)
//   r >  b  u = N_n e^{i k_n r}
// Gauge: N_n is the principal square root of N_n^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"
#include "gamow/packets.hpp"
#include "gamow/poles.hpp"
#include "gamow/scattering.hpp"

namespace gamow {

/// Largest residue-contour radius around k that stays clear of the other poles and of k = 0.
inline double residue_radius(cplx k, std::span<const Pole> others) {
  double rho = 1e-3;
  if (k.imag() != 0.0) rho = std::min(rho, 0.5 * std::abs(k.imag()));
  rho = std::min(rho, 0.5 * std::abs(k));
  for (const auto& p : others) {
    const double d = std::abs(p.k - k);
    if (d > 0.0) rho = std::min(rho, 0.5 * d);
  }
  return rho;
}

class GamowState {
 public:
  GamowState(const ShellScattering& scat, Pole pole, cplx n_sq, double contour_radius)
      : scat_(scat), pole_(pole), n_sq_(n_sq), n_factor_(std::sqrt(n_sq)), radius_(contour_radius) {
    coeffs_ = scat_.matching(pole_.k);
    j_minus_ = scat_.jost(pole_.k).j_minus;
  }

  const Pole& pole() const { return pole_; }
  cplx k() const { return pole_.k; }
  cplx z() const { return pole_.z; }
  cplx n_sq() const { return n_sq_; }
  cplx n_factor() const { return n_factor_; }
  const MatchingCoefficients& coeffs() const { return coeffs_; }
  cplx q() const { return coeffs_.q; }
  double contour_radius() const { return radius_; }
  const ShellScattering& scattering() const { return scat_; }
  const ShellPotential& potential() const { return scat_.potential(); }

  /// Exponential growth rate of |u| for large r.
  double growth() const { return std::max(0.0, -pole_.k.imag()); }

  RadialPoint at(double r) const {
    if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
    if (r > scat_.potential().b()) {
      const cplx e = n_factor_ * std::exp(I * pole_.k * r);
      return {e, I * pole_.k * e};
    }
    const cplx scale = 2.0 * I * n_factor_ / j_minus_;
    const RadialPoint c = scat_.regular(r, pole_.k);
    return {scale * c.value, scale * c.derivative};
  }

  cplx operator()(double r) const { return at(r).value; }

  /// Same function multiplied by `factor` (N_n -> factor N_n).
  GamowState scaled(cplx factor) const {
    GamowState s = *this;
    s.n_factor_ *= factor;
    s.n_sq_ *= factor * factor;
    return s;
  }

 private:
  ShellScattering scat_;
  Pole pole_;
  cplx n_sq_;
  cplx n_factor_;
  double radius_;
  MatchingCoefficients coeffs_{};
  cplx j_minus_{};
};

/// Builds the state for `pole`; `others` only limits the residue contour radius.
inline GamowState build_state(const ShellScattering& scat, const Pole& pole, std::span<const Pole> others = {}) {
  const double rho = residue_radius(pole.k, others);
  auto s = [&](cplx q) { return scat.s_matrix(q); };
  const ContourResidue res = contour_residue(s, pole.k, rho, 1e-8);
  const cplx n_sq = I * res.value;
  // Analytic S has vanishing residue; a normalization this small means k is not a zero of J+.
  if (std::abs(n_sq) < 1e-10)
    throw ResidueError("S-matrix residue vanishes: k is not a pole");
  return GamowState(scat, pole, n_sq, res.radius);
}

/// Builds states for every pole in a search result, in the same order.
inline std::vector<GamowState> build_states(const ShellScattering& scat, std::span<const Pole> poles,
                                            unsigned threads = 0) {
  return parallel_map<GamowState>(poles.size(), [&](std::size_t i) { return build_state(scat, poles[i], poles); },
                                  threads);
}

struct ZeldovichResult {
  cplx value;
  std::vector<double> mu;
  std::vector<cplx> samples;   ///< regulated integrals I(mu_j)
  std::vector<cplx> estimates; ///< successive Neville estimates of I(0)
};

/// mu_j = mu0 4^{-j}, j = 0..3, with mu0 = 1/(128 b^2).
inline std::vector<double> default_mu_sequence(const ShellPotential& pot) {
  const double mu0 = 1.0 / (128.0 * pot.b() * pot.b());
  return {mu0, mu0 / 4.0, mu0 / 16.0, mu0 / 64.0};
}

namespace detail {

// \int_b^\infty exp(-mu r^2 + 2 i K r) dr along the ray r = b + s e^{i theta}.
// The ray angle keeps both the Gaussian and the oscillatory factor decaying.
inline cplx gaussian_tail(double mu, cplx K, double b) {
  if (K.real() < 0.0) return std::conj(gaussian_tail(mu, -std::conj(K), b));
  const double phase = std::arg(K);
  const double lo = std::max(-pi / 4.0, -phase);
  const double hi = std::min(pi / 4.0, pi - phase);
  if (!(lo < hi))
    throw ExtrapolationError("regulated exterior integral diverges as mu -> 0 (arg K <= -pi/4)");
  const double theta = 0.5 * (lo + hi);
  const cplx dir = std::polar(1.0, theta);
  const double decay = 2.0 * std::abs(K) * std::sin(phase + theta);
  // Beyond s_max the integrand is below e^{-45} of its value at s = 0.
  double s_max = 45.0 / std::max(decay, 1e-300);
  if (mu > 0.0) s_max = std::min(s_max, std::sqrt(45.0 / (mu * std::cos(2.0 * theta))) + 45.0 / std::max(decay, 1.0));
  auto f = [&](double s) {
    const cplx r = b + s * dir;
    return std::exp(-mu * r * r + 2.0 * I * K * r) * dir;
  };
  const QuadResult q = integrate(f, 0.0, s_max, Tolerance{1e-17, 1e-14});
  return q.value;
}

}  // namespace detail

/// \int_0^\infty e^{-mu r^2} u_A(r) u_B(r) dr, interior by quadrature, exterior by contour rotation.
inline cplx regulated_overlap(const GamowState& A, const GamowState& B, double mu) {
  const ShellPotential& pot = A.potential();
  auto f = [&](double r) { return std::exp(-mu * r * r) * A(r) * B(r); };
  const Tolerance tol{1e-17, 1e-14};
  const cplx inner = integrate(f, 0.0, pot.a(), tol).value + integrate(f, pot.a(), pot.b(), tol).value;
  const cplx K = 0.5 * (A.k() + B.k());
  return inner + A.n_factor() * B.n_factor() * detail::gaussian_tail(mu, K, pot.b());
}

/// Gaussian-regulated overlap extrapolated to mu -> 0 by Neville's scheme.
inline ZeldovichResult zeldovich_overlap(const GamowState& A, const GamowState& B, std::vector<double> mu = {}) {
  if (mu.empty()) mu = default_mu_sequence(A.potential());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0)) throw DomainError("regulator values must be positive");
    if (i > 0 && !(mu[i] < mu[i - 1])) throw DomainError("regulator sequence must decrease strictly");
  }
  ZeldovichResult out;
  out.mu = mu;
  for (double m : mu) out.samples.push_back(regulated_overlap(A, B, m));
  const Extrapolation ex = neville_to_zero(out.mu, out.samples);
  out.estimates = ex.diagonal;
  out.value = ex.value;
  // Stage-to-stage corrections must shrink once they are above the rounding floor.
  const double floor = 1e-12 * std::max(1.0, std::abs(out.value));
  for (std::size_t j = 2; j < out.estimates.size(); ++j) {
    const double prev = std::abs(out.estimates[j - 1] - out.estimates[j - 2]);
    const double cur = std::abs(out.estimates[j] - out.estimates[j - 1]);
    if (cur > floor && cur > prev) throw ExtrapolationError("Richardson stages do not contract");
  }
  return out;
}

inline ZeldovichResult zeldovich_norm(const GamowState& s, std::vector<double> mu = {}) {
  return zeldovich_overlap(s, s, std::move(mu));
}

/// res_{z=z_n} G(r, s; z) by contour quadrature in k with dz = 2k dk.
inline cplx green_residue(const GamowState& state, double r, double s) {
  if (!(r >= 0.0) || !(s >= 0.0)) throw DomainError("radius must be non-negative");
  const ShellScattering& scat = state.scattering();
  auto g = [&](cplx q) { return scat.green_function(r, s, q) * 2.0 * q; };
  return contour_residue(g, state.k(), state.contour_radius(), 1e-8).value;
}

namespace detail {

template <class F>
cplx pair_with_state(const WavePacket& phi, const GamowState& state, F&& weight) {
  if (phi.is_zero()) return {};
  const ShellPotential& pot = state.potential();
  const double rc = phi.cutoff(state.growth());
  auto f = [&](double r) { return weight(phi(r)) * state(r); };
  return WavePacket::integrate_pieces(f, phi.breakpoints(rc, {pot.a(), pot.b()}));
}

}  // namespace detail

/// <phi|z_n> = \int phi(r)^* u(r; z_n) dr.
inline cplx pair_ket(const WavePacket& phi, const GamowState& state) {
  return detail::pair_with_state(phi, state, [](cplx v) { return std::conj(v); });
}

/// <z_n|phi> = \int phi(r) u(r; z_n) dr (no conjugation).
inline cplx pair_bra(const WavePacket& phi, const GamowState& state) {
  return detail::pair_with_state(phi, state, [](cplx v) { return v; });
}

struct EvolutionFactor {
  cplx value;
  double t;
};

/// e^{-i z_n t}. Resonances evolve forward only (t >= 0), anti-resonances backward only.
inline EvolutionFactor evolution_factor(const Pole& pole, double t) {
  if (pole.kind == PoleKind::resonance && t < 0.0)
    throw SemigroupDomainError("resonance states evolve only for t >= 0");
  if (pole.kind == PoleKind::anti_resonance && t > 0.0)
    throw SemigroupDomainError("anti-resonance states evolve only for t <= 0");
  return {std::exp(-I * pole.z * t), t};
}

/// L2-normalized N u(r; z_n) e^{-mu0 r^2}, mu0 = 1/(2 b^2) by default.
inline WavePacket resonance_packet(const GamowState& state, double mu0 = 0.0) {
  const ShellPotential& pot = state.potential();
  if (mu0 <= 0.0) mu0 = 1.0 / (2.0 * pot.b() * pot.b());
  const double g = state.growth();
  double scale = std::abs(state.n_factor());
  for (int i = 0; i <= 400; ++i) {
    const double r = pot.b() * i / 400.0;
    scale = std::max(scale, std::abs(state(r)) * std::exp(-g * r));
  }
  ShapedTerm term{[state, mu0](double r) { return state(r) * std::exp(-mu0 * r * r); }, mu0, g, 1.25 * scale};
  return WavePacket({}, {term}).normalized();
}

}  // namespace gamow

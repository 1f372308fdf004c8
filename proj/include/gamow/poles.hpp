#pragma once

// Zeros of J+ in the complex k-plane: argument-principle counting over rectangles,
// recursive bisection down to isolated zeros, Newton polishing, and the mirror
// bookkeeping that pairs every resonance k_n with the anti-resonance -k_n*.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"
#include "gamow/scattering.hpp"

namespace gamow {

enum class PoleKind { resonance, anti_resonance, bound, virtual_state };

inline const char* to_string(PoleKind kind) {
  switch (kind) {
    case PoleKind::resonance: return "resonance";
    case PoleKind::anti_resonance: return "anti_resonance";
    case PoleKind::bound: return "bound";
    case PoleKind::virtual_state: return "virtual";
  }
  return "unknown";
}

/// Quadrant and axis placement with axis tolerance 1e-9. k = 0 counts as virtual.
inline PoleKind classify(cplx k) {
  constexpr double axis = 1e-9;
  const double re = k.real();
  const double im = k.imag();
  if (std::abs(re) <= axis) return im > axis ? PoleKind::bound : PoleKind::virtual_state;
  if (im > axis) return PoleKind::bound;  // J+ has no zeros here for a real potential
  return re > 0.0 ? PoleKind::resonance : PoleKind::anti_resonance;
}

struct Pole {
  int n = 0;
  cplx k;
  cplx z;
  PoleKind kind = PoleKind::resonance;
  double jost_residual = 0.0;

  double width() const { return -2.0 * z.imag(); }
};

struct SearchRegion {
  double re_min;
  double re_max;
  double im_min;
  double im_max;
  double grid_step = 0.25;

  void validate() const {
    if (!(re_min < re_max) || !(im_min < im_max)) throw DomainError("search region is empty");
    if (!(grid_step > 0.0)) throw DomainError("grid_step must be positive");
  }

  /// Re k in [1e-3, 10 pi/(b-a)], Im k in [-5, 0]: the first ten or so shell resonances.
  static SearchRegion default_for(const ShellPotential& pot) {
    return {1e-3, 10.0 * pi / pot.width(), -5.0, 0.0, 0.25};
  }
};

struct CellFailure {
  SearchRegion cell;
  std::string message;
};

struct PoleSearch {
  std::vector<Pole> poles;  ///< resonances n = 1.., their mirrors n = -1.., bound/virtual states
  std::vector<CellFailure> failures;
  int winding = 0;  ///< zeros of J+ inside the (possibly perturbed) search region

  std::vector<Pole> resonances() const {
    std::vector<Pole> out;
    for (const auto& p : poles)
      if (p.kind == PoleKind::resonance) out.push_back(p);
    return out;
  }
};

class PoleFinder {
 public:
  explicit PoleFinder(ShellPotential pot, unsigned threads = 0) : scat_(pot), threads_(threads) {}

  const ShellScattering& scattering() const { return scat_; }

  /// Winding number of J+ around the rectangle, rounded after the integer check.
  int count_zeros(const SearchRegion& region) const {
    region.validate();
    const double w = winding_value(corners(region)).real();
    return round_winding(w);
  }

  /// Winding number of J+ around a circle; 1 certifies a simple isolated zero.
  int winding_circle(cplx centre, double radius) const {
    auto f = [&](cplx k) { return log_derivative(k); };
    const cplx v = circle_integral(f, centre, radius, 256);
    return round_winding(v.real());
  }

  PoleSearch find_poles(const SearchRegion& region) const {
    region.validate();
    PoleSearch out;
    SearchRegion root = region;
    std::optional<int> total;
    // The outer rectangle is nudged outward if a zero sits on it.
    for (double nudge : {0.0, 1e-4, 2e-4, 3e-4}) {
      root = {region.re_min - nudge, region.re_max + nudge, region.im_min - nudge,
              region.im_max + (region.im_max == 0.0 ? 0.0 : nudge), region.grid_step};
      try {
        total = count_zeros(root);
        break;
      } catch (const BoundaryZeroError&) {
      }
    }
    if (!total) throw BoundaryZeroError("search region boundary passes through a zero of J+");
    out.winding = *total;

    std::vector<cplx> roots;
    std::vector<Cell> level;
    if (*total > 0) level.push_back({root, *total});
    while (!level.empty()) {
      auto results = parallel_map<CellOutcome>(
          level.size(), [&](std::size_t i) { return process(level[i]); }, threads_);
      std::vector<Cell> next;
      for (auto& r : results) {
        for (auto& c : r.children) next.push_back(c);
        if (r.root) roots.push_back(*r.root);
        if (r.failure) out.failures.push_back(*r.failure);
      }
      level = std::move(next);
    }

    std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) {
      return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
    });
    int next_index = 1;
    for (cplx k : roots) {
      Pole p;
      p.kind = classify(k);
      if (p.kind == PoleKind::bound || p.kind == PoleKind::virtual_state) k = {0.0, k.imag()};
      p.k = k;
      p.z = k * k;
      p.n = next_index++;
      p.jost_residual = std::abs(scat_.jost_plus(k));
      out.poles.push_back(p);
    }
    const std::size_t found = out.poles.size();
    for (std::size_t i = 0; i < found; ++i) {
      const Pole& p = out.poles[i];
      if (p.kind != PoleKind::resonance) continue;
      out.poles.push_back(mirror(p));
    }
    return out;
  }

  /// Anti-resonance partner -k* of a resonance, with index -n.
  Pole mirror(const Pole& p) const {
    Pole m;
    m.n = -p.n;
    m.k = -std::conj(p.k);
    m.z = m.k * m.k;
    m.kind = classify(m.k);
    m.jost_residual = std::abs(scat_.jost_plus(m.k));
    return m;
  }

  /// Newton iteration on J+ from `start`; nullopt if it fails to converge in 100 steps.
  std::optional<cplx> polish(cplx start) const {
    cplx k = start;
    int settled = 0;
    for (int it = 0; it < 100; ++it) {
      const cplx f = scat_.jost_plus(k);
      const cplx df = scat_.jost_plus_derivative(k);
      if (df == cplx{}) return std::nullopt;
      const cplx step = f / df;
      k -= step;
      if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) return std::nullopt;
      const bool small_residual = std::abs(scat_.jost_plus(k)) <= 1e-11 * (1.0 + std::abs(k));
      if (small_residual && std::abs(step) <= 1e-14 * (1.0 + std::abs(k))) return k;
      // Two extra steps past the residual target absorb the central-difference error in J+'.
      if (small_residual && ++settled >= 3) return k;
    }
    return std::nullopt;
  }

 private:
  struct Cell {
    SearchRegion rect;
    int count;
  };
  struct CellOutcome {
    std::vector<Cell> children;
    std::optional<cplx> root;
    std::optional<CellFailure> failure;
  };

  cplx log_derivative(cplx k) const { return scat_.jost_plus_derivative(k) / scat_.jost_plus(k); }

  static std::array<cplx, 4> corners(const SearchRegion& r) {
    return {cplx{r.re_min, r.im_min}, cplx{r.re_max, r.im_min}, cplx{r.re_max, r.im_max},
            cplx{r.re_min, r.im_max}};
  }

  static int round_winding(double w) {
    const double rounded = std::round(w);
    if (std::abs(w - rounded) > 0.05)
      throw NonIntegerWindingError("winding number " + std::to_string(w) + " is not close to an integer");
    return static_cast<int>(rounded);
  }

  // (1/2 pi i) * contour integral of J+'/J+ around the polygon.
  cplx winding_value(const std::array<cplx, 4>& c) const {
    double closest = INFINITY;
    auto f = [&](cplx k) {
      const cplx jp = scat_.jost_plus(k);
      const cplx djp = scat_.jost_plus_derivative(k);
      if (std::abs(jp) < ShellScattering::pole_threshold(k))
        throw BoundaryZeroError("J+ vanishes on a search contour");
      closest = std::min(closest, std::abs(jp / djp));
      return djp / jp;
    };
    cplx total{};
    for (std::size_t i = 0; i < 4; ++i) {
      const QuadResult q = integrate_segment(f, c[i], c[(i + 1) % 4], Tolerance{1e-7, 1e-9}, 4000);
      if (!q.converged) throw NonIntegerWindingError("boundary quadrature of J+'/J+ did not converge");
      total += q.value;
    }
    if (closest < 1e-6) throw BoundaryZeroError("a zero of J+ lies within 1e-6 of a search contour");
    return total / (2.0 * pi * I);
  }

  std::pair<SearchRegion, SearchRegion> split(const SearchRegion& r, double shift) const {
    const double dx = r.re_max - r.re_min;
    const double dy = r.im_max - r.im_min;
    SearchRegion lo = r;
    SearchRegion hi = r;
    if (dx >= dy) {
      const double m = 0.5 * (r.re_min + r.re_max) + shift * dx;
      lo.re_max = m;
      hi.re_min = m;
    } else {
      const double m = 0.5 * (r.im_min + r.im_max) + shift * dy;
      lo.im_max = m;
      hi.im_min = m;
    }
    return {lo, hi};
  }

  static bool contains(const SearchRegion& r, cplx k, double margin) {
    return k.real() >= r.re_min - margin && k.real() <= r.re_max + margin &&
           k.imag() >= r.im_min - margin && k.imag() <= r.im_max + margin;
  }

  CellOutcome process(const Cell& cell) const {
    CellOutcome out;
    const SearchRegion& r = cell.rect;
    const double size = std::max(r.re_max - r.re_min, r.im_max - r.im_min);
    if (cell.count == 1 && size <= r.grid_step) {
      const cplx centre{0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max)};
      const auto k = polish(centre);
      if (k && contains(r, *k, 1e-9 * (1.0 + std::abs(*k)))) {
        out.root = *k;
        return out;
      }
      if (size < 1e-7) {
        out.failure = CellFailure{r, "Newton iteration did not converge inside its cell"};
        return out;
      }
    }
    if (size < 1e-7) {
      out.failure = CellFailure{r, "cell shrank below 1e-7 while holding " + std::to_string(cell.count) +
                                       " zeros (multiple zero?)"};
      return out;
    }
    // The midpoint shifts are relative to the cell size so tiny cells stay valid.
    for (double shift : {0.0, 1e-4, -1e-4, 3e-3, -3e-3}) {
      auto [lo, hi] = split(r, shift);
      try {
        const int n_lo = round_winding(winding_value(corners(lo)).real());
        const int n_hi = round_winding(winding_value(corners(hi)).real());
        if (n_lo + n_hi != cell.count) continue;
        if (n_lo > 0) out.children.push_back({lo, n_lo});
        if (n_hi > 0) out.children.push_back({hi, n_hi});
        return out;
      } catch (const BoundaryZeroError&) {
      } catch (const NonIntegerWindingError&) {
      }
    }
    out.failure = CellFailure{r, "could not split cell consistently"};
    return out;
  }

  ShellScattering scat_;
  unsigned threads_;
};

/// Box around the positive imaginary axis holding every bound state with kappa >= 1e-2
/// (binding is bounded by the well depth, kappa < sqrt(-v0)); empty for v0 >= 0.
inline std::optional<SearchRegion> bound_state_region(const ShellPotential& pot) {
  if (!(pot.v0() < 0.0)) return std::nullopt;
  return SearchRegion{-0.25, 0.25, 1e-2, std::sqrt(-pot.v0()) + 0.5, 0.25};
}

/// Resonances (and mirrors) in the default box plus the bound states. Bound states are
/// numbered 1.. in order of increasing kappa, independently of the resonance indices.
inline PoleSearch default_pole_search(const PoleFinder& finder) {
  const ShellPotential& pot = finder.scattering().potential();
  PoleSearch out = finder.find_poles(SearchRegion::default_for(pot));
  if (const auto box = bound_state_region(pot)) {
    PoleSearch b = finder.find_poles(*box);
    std::vector<Pole> bound;
    for (const auto& p : b.poles)
      if (p.kind == PoleKind::bound) bound.push_back(p);
    std::sort(bound.begin(), bound.end(), [](const Pole& x, const Pole& y) { return x.k.imag() < y.k.imag(); });
    for (std::size_t i = 0; i < bound.size(); ++i) bound[i].n = static_cast<int>(i) + 1;
    out.poles.insert(out.poles.end(), bound.begin(), bound.end());
    out.failures.insert(out.failures.end(), b.failures.begin(), b.failures.end());
    out.winding += b.winding;
  }
  return out;
}

}  // namespace gamow

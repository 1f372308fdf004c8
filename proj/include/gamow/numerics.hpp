#pragma once

// Numerical building blocks shared by every module: adaptive Gauss-Kronrod
// quadrature of complex-valued integrands (on real intervals and straight
// complex segments), trapezoidal contour residues, polynomial extrapolation
// and a deterministic parallel map.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gamow/errors.hpp"

namespace gamow {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

struct Tolerance {
  double abs = 1e-14;
  double rel = 1e-12;
};

struct QuadResult {
  cplx value{};
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

/// Relative accuracy, against \int |f|, below which cancellation defeats any quadrature.
inline constexpr double roundoff_floor = 50.0 * std::numeric_limits<double>::epsilon();

namespace detail {

struct Panel {
  double lo;
  double hi;
  cplx value;
  double error;
  double magnitude;  ///< Kronrod estimate of \int |f|
};

template <class F>
Panel kronrod21(F&& f, double lo, double hi) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& x = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);

  // abscissa()[0] is the centre; odd indices are shared with the 10-point Gauss rule.
  cplx fc = f(mid);
  cplx k_sum = fc * wk[0];
  cplx g_sum{};
  double m_sum = std::abs(fc) * wk[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const cplx fp = f(mid + half * x[i]);
    const cplx fm = f(mid - half * x[i]);
    k_sum += (fp + fm) * wk[i];
    m_sum += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 1) g_sum += (fp + fm) * wg[i / 2];
  }
  return {lo, hi, k_sum * half, std::abs((k_sum - g_sum) * half), m_sum * std::abs(half)};
}

}  // namespace detail

/// Adaptive 21-point Gauss-Kronrod quadrature of a complex integrand on [lo, hi].
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// drops below max(tol.abs, tol.rel * |value|), or below the rounding floor
/// 50 eps \int |f| that cancellation makes unreachable anyway. Panels are summed in left-to-right
/// order, so the result does not depend on the refinement history.
template <class F>
QuadResult integrate(F&& f, double lo, double hi, Tolerance tol = {}, int max_panels = 4000) {
  QuadResult out;
  if (lo == hi) return out;
  std::vector<detail::Panel> panels{detail::kronrod21(f, lo, hi)};
  out.evaluations = 21;
  auto total = [&] {
    cplx v{};
    double e = 0.0;
    std::sort(panels.begin(), panels.end(),
              [](const auto& p, const auto& q) { return p.lo < q.lo; });
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };
  while (true) {
    double err = 0.0;
    double mag = 0.0;
    cplx val{};
    for (const auto& p : panels) {
      val += p.value;
      err += p.error;
      mag += p.magnitude;
    }
    if (err <= std::max({tol.abs, tol.rel * std::abs(val), roundoff_floor * mag})) break;
    if (static_cast<int>(panels.size()) >= max_panels) {
      out.converged = false;
      break;
    }
    auto worst = std::max_element(panels.begin(), panels.end(), [](const auto& p, const auto& q) {
      return p.error < q.error || (p.error == q.error && p.lo > q.lo);
    });
    const double lo_w = worst->lo;
    const double hi_w = worst->hi;
    const double mid = 0.5 * (lo_w + hi_w);
    if (!(mid > lo_w && mid < hi_w)) {
      out.converged = false;
      break;
    }
    *worst = detail::kronrod21(f, lo_w, mid);
    panels.push_back(detail::kronrod21(f, mid, hi_w));
    out.evaluations += 42;
  }
  auto [v, e] = total();
  out.value = v;
  out.error = e;
  return out;
}

/// Adaptive Gauss-Kronrod for m integrands sharing one sampling: f(x, out) fills out[0..m).
///
/// A panel is refined while any component misses max(tol.abs, tol.rel * |value_j|).
template <class F>
std::vector<cplx> integrate_many(F&& f, std::size_t m, double lo, double hi, Tolerance tol = {},
                                 int max_panels = 4000) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using gauss = boost::math::quadrature::gauss<double, 10>;
  struct VPanel {
    double lo, hi;
    std::vector<cplx> value;
    std::vector<double> error;
  };
  std::vector<cplx> buf_p(m), buf_m(m);
  auto rule = [&](double a, double b) {
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    std::vector<cplx> ks(m), gs(m);
    f(mid, std::span<cplx>(buf_p));
    for (std::size_t j = 0; j < m; ++j) ks[j] = buf_p[j] * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
      f(mid + half * x[i], std::span<cplx>(buf_p));
      f(mid - half * x[i], std::span<cplx>(buf_m));
      for (std::size_t j = 0; j < m; ++j) {
        const cplx s = buf_p[j] + buf_m[j];
        ks[j] += s * wk[i];
        if (i % 2 == 1) gs[j] += s * wg[i / 2];
      }
    }
    VPanel p{a, b, std::vector<cplx>(m), std::vector<double>(m)};
    for (std::size_t j = 0; j < m; ++j) {
      p.value[j] = ks[j] * half;
      p.error[j] = std::abs((ks[j] - gs[j]) * half);
    }
    return p;
  };
  std::vector<VPanel> panels{rule(lo, hi)};
  std::vector<cplx> val(m);
  std::vector<double> err(m);
  while (true) {
    std::fill(val.begin(), val.end(), cplx{});
    std::fill(err.begin(), err.end(), 0.0);
    for (const auto& p : panels)
      for (std::size_t j = 0; j < m; ++j) {
        val[j] += p.value[j];
        err[j] += p.error[j];
      }
    // Worst component measured against its own budget.
    double worst_ratio = 0.0;
    std::size_t worst_j = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double ratio = err[j] / std::max(tol.abs, tol.rel * std::abs(val[j]));
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst_j = j;
      }
    }
    if (worst_ratio <= 1.0 || static_cast<int>(panels.size()) >= max_panels) break;
    auto worst = std::max_element(panels.begin(), panels.end(), [&](const auto& p, const auto& q) {
      return p.error[worst_j] < q.error[worst_j];
    });
    const double a = worst->lo;
    const double b = worst->hi;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) break;
    *worst = rule(a, mid);
    panels.push_back(rule(mid, b));
  }
  std::sort(panels.begin(), panels.end(), [](const auto& p, const auto& q) { return p.lo < q.lo; });
  std::fill(val.begin(), val.end(), cplx{});
  for (const auto& p : panels)
    for (std::size_t j = 0; j < m; ++j) val[j] += p.value[j];
  return val;
}

/// Integral of f along the straight segment from z0 to z1 in the complex plane.
template <class F>
QuadResult integrate_segment(F&& f, cplx z0, cplx z1, Tolerance tol = {}, int max_panels = 4000) {
  const cplx dz = z1 - z0;
  auto g = [&](double s) { return f(z0 + s * dz) * dz; };
  return integrate(g, 0.0, 1.0, tol, max_panels);
}

struct TailResult {
  cplx value{};
  double error = 0.0;
  double cutoff = 0.0;  ///< upper end of the last panel that was integrated
  int panels = 0;
  bool converged = false;
};

/// Integral of f over [start, cap] panel by panel, stopping once three consecutive
/// panel contributions fall below tail_rel * |running total| (and tail_abs).
///
/// Used for semi-infinite integrals whose integrand decays without a usable
/// closed-form bound. `converged` is false when the cap was reached first.
template <class F>
TailResult integrate_tail(F&& f, double start, double panel_width, double cap, Tolerance tol,
                          double tail_rel, double tail_abs = 0.0, double min_extent = 0.0) {
  TailResult out;
  int quiet = 0;
  double lo = start;
  while (lo < cap) {
    const double hi = std::min(cap, lo + panel_width);
    const QuadResult q = integrate(f, lo, hi, tol);
    out.value += q.value;
    out.error += q.error;
    out.cutoff = hi;
    ++out.panels;
    const double mag = std::abs(q.value);
    if (mag <= std::max(tail_rel * std::abs(out.value), tail_abs) && hi >= min_extent) {
      if (++quiet == 3) {
        out.converged = true;
        return out;
      }
    } else {
      quiet = 0;
    }
    lo = hi;
  }
  return out;
}

/// (1/2πi)∮ f(z) dz over the circle |z - centre| = radius by the M-point trapezoidal rule.
template <class F>
cplx circle_integral(F&& f, cplx centre, double radius, int nodes) {
  cplx sum{};
  for (int j = 0; j < nodes; ++j) {
    const double theta = 2.0 * pi * (static_cast<double>(j) + 0.5) / nodes;
    const cplx w = std::polar(1.0, theta);
    sum += f(centre + radius * w) * w;
  }
  return sum * (radius / nodes);
}

struct ContourResidue {
  cplx value;        ///< 128-node estimate
  cplx coarse;       ///< 64-node estimate
  double discrepancy;  ///< |value - coarse| / max(|value|, tiny)
  double radius;
};

/// Residue of f at `centre` by trapezoidal contour quadrature, with a 64 vs 128 node check.
///
/// If the two estimates differ by more than `accept`, the radius is shrunk tenfold
/// and the computation repeated once; a second failure raises ResidueError.
template <class F>
ContourResidue contour_residue(F&& f, cplx centre, double radius, double accept = 1e-8) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const cplx coarse = circle_integral(f, centre, radius, 64);
    const cplx fine = circle_integral(f, centre, radius, 128);
    const double scale = std::max(std::abs(fine), 1e-300);
    const double disc = std::abs(fine - coarse) / scale;
    if (disc <= accept) return {fine, coarse, disc, radius};
    radius *= 0.1;
  }
  throw ResidueError("contour residue estimates disagree after shrinking the contour");
}

/// Central-difference derivative with step h.
template <class F>
cplx central_difference(F&& f, cplx z, double h) {
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

struct Extrapolation {
  cplx value;
  std::vector<cplx> diagonal;  ///< successive Neville estimates at x = 0
};

/// Polynomial (Neville) extrapolation of samples (xs[i], ys[i]) to x = 0.
inline Extrapolation neville_to_zero(std::span<const double> xs, std::span<const cplx> ys) {
  const std::size_t n = xs.size();
  if (n == 0 || ys.size() != n) throw DomainError("extrapolation needs matching, non-empty samples");
  std::vector<cplx> p(ys.begin(), ys.end());
  Extrapolation out;
  out.diagonal.push_back(p[0]);
  // After pass m, p[i] holds the degree-m interpolant through points i-m..i evaluated at 0.
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = n - 1; i >= m; --i) {
      p[i] = (xs[i - m] * p[i] - xs[i] * p[i - 1]) / (xs[i - m] - xs[i]);
      if (i == m) break;
    }
    out.diagonal.push_back(p[m]);
  }
  out.value = out.diagonal.back();
  return out;
}

/// Worker count for parallel sections: GAMOW_LAB_THREADS if set, else hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("GAMOW_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// out[i] = fn(i) for i in [0, n). Each slot is written by exactly one worker, so the
/// result is independent of the thread count.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::optional<T>> slots(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < n; i += threads) slots[i].emplace(fn(i));
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace gamow

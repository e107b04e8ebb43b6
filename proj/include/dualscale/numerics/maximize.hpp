#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "dualscale/errors.hpp"

namespace dualscale {

struct Maximum1d {
  double argmax = 0.0;
  double value = 0.0;
};

namespace detail {

// Keeps the best (x, f) seen; ties go to the smaller x.
struct BestPoint {
  double x = 0.0;
  double f = 0.0;
  bool set = false;

  void offer(double px, double pf) {
    if (!set || pf > f || (pf == f && px < x)) {
      x = px;
      f = pf;
      set = true;
    }
  }
};

template <class F>
void golden_section_max(F& f, double a, double b, double tol, BestPoint& best) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double u = b - kInvPhi * (b - a);
  double v = a + kInvPhi * (b - a);
  double fu = f(u);
  double fv = f(v);
  best.offer(u, fu);
  best.offer(v, fv);
  for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
    if (fu >= fv) {
      b = v;
      v = u;
      fv = fu;
      u = b - kInvPhi * (b - a);
      fu = f(u);
      best.offer(u, fu);
    } else {
      a = u;
      u = v;
      fu = fv;
      v = a + kInvPhi * (b - a);
      fv = f(v);
      best.offer(v, fv);
    }
  }
}

}  // namespace detail

/// Number of intervals in the safety grid of maximize_unimodal_1d.
inline constexpr std::size_t kSafetyGridIntervals = 64;

/// Maximizes f over [a, b]. Golden-section search runs first; a uniform
/// safety grid (endpoints included) then catches optima the bracket missed
/// when f is not exactly unimodal, and the best grid cell is refined by a
/// second golden pass. Ties resolve to the smaller abscissa.
template <class F>
Maximum1d maximize_unimodal_1d(F&& f, double a, double b, double tol) {
  if (a > b) throw ArgumentError("maximize_unimodal_1d: requires a <= b");
  if (!(tol > 0.0)) throw ArgumentError("maximize_unimodal_1d: tol must be positive");

  detail::BestPoint best;
  const double fa = f(a);
  best.offer(a, fa);
  if (a == b) return {best.x, best.f};
  best.offer(b, f(b));

  detail::golden_section_max(f, a, b, tol, best);
  const double bracketed = best.f;

  const std::size_t n = kSafetyGridIntervals;
  const double h = (b - a) / static_cast<double>(n);
  std::size_t grid_best = 0;
  double grid_value = fa;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = (i == n) ? b : a + h * static_cast<double>(i);
    const double fx = f(x);
    best.offer(x, fx);
    if (fx > grid_value) {
      grid_value = fx;
      grid_best = i;
    }
  }
  if (grid_value > bracketed) {
    const double lo = grid_best == 0 ? a : a + h * static_cast<double>(grid_best - 1);
    const double hi = grid_best == n ? b : a + h * static_cast<double>(grid_best + 1);
    detail::golden_section_max(f, lo, std::min(hi, b), tol, best);
  }
  return {best.x, best.f};
}

}  // namespace dualscale

#pragma once

#include <cmath>
#include <numbers>

#include "dualscale/errors.hpp"

namespace dualscale {

namespace detail {

// Power series, sum_k (-x^2/4)^k / (k!)^2. Terms peak near k = |x|/2 so
// cancellation stays below ~1e-13 absolute for |x| < 8.
inline double j0_series(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// J0(x) = (1/pi) int_0^pi cos(x sin t) dt. The integrand is smooth and
// periodic, so the trapezoid rule converges geometrically; the error is
// about 2 J_{2n}(x), negligible once 2n exceeds |x| by a few tens.
inline double j0_periodic_trapezoid(double x) {
  const int n = 2 * static_cast<int>(std::ceil(std::abs(x))) + 64;
  const double h = std::numbers::pi / n;
  double sum = 0.5 * (1.0 + 1.0);  // cos(0) at both ends
  for (int i = 1; i < n; ++i) sum += std::cos(x * std::sin(i * h));
  return sum / n;
}

// Hankel asymptotic expansion, truncated at the smallest term.
inline double j0_asymptotic(double x) {
  const double ax = std::abs(x);
  const double z8 = 8.0 * ax;
  // t_k = prod_{i<=k} (2i-1)^2 / (k! (8x)^k); P = t0 - t2 + t4 ..., Q = -t1 + t3 - ...
  double p = 1.0, q = 0.0;
  double t = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double m = 2.0 * k - 1.0;
    const double next = t * (m * m) / (k * z8);
    if (next > t) break;
    t = next;
    const double sign = (((k + 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1) {
      q += sign * t;
    } else {
      p += sign * t;
    }
    if (t < 1e-17) break;
  }
  const double chi = ax - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * ax)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// Zeroth-order Bessel function of the first kind.
inline double bessel_j0(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
  const double ax = std::abs(x);
  if (ax < 8.0) return detail::j0_series(ax);
  if (ax < 60.0) return detail::j0_periodic_trapezoid(ax);
  return detail::j0_asymptotic(ax);
}

}  // namespace dualscale

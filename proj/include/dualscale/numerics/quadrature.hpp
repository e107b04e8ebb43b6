#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "dualscale/errors.hpp"

namespace dualscale {

/// Nodes and positive weights on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  auto integrate(F&& f) const {
    using R = decltype(f(nodes.front()));
    R sum = weights.front() * f(nodes.front());
    for (std::size_t i = 1; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Gauss-Legendre rule of the given order mapped to [a, b]; exact for
/// polynomials up to degree 2*order - 1. Roots by Newton iteration on the
/// three-term recurrence.
inline QuadratureRule gauss_legendre(std::size_t order, double a, double b) {
  if (order == 0) throw ArgumentError("gauss_legendre: order must be >= 1");
  if (!(a < b)) throw ArgumentError("gauss_legendre: requires a < b");

  const std::size_t n = order;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  // Returns (P_n(x), P_n'(x)).
  const auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0)};
  };

  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace dualscale

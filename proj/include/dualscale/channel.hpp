#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "dualscale/errors.hpp"
#include "dualscale/numerics/bessel.hpp"
#include "dualscale/numerics/hermitian.hpp"
#include "dualscale/numerics/quadrature.hpp"
#include "dualscale/numerics/rng.hpp"
#include "dualscale/numerics/sampling.hpp"

namespace dualscale {

inline constexpr std::size_t kDefaultQuadOrder = 64;

/// Direction of arrival, single-side angular spread and average gain of one
/// user. The power-angle spectrum is uniform on [theta - spread, theta + spread].
struct UserGeometry {
  double theta = 0.0;         // rad
  double delta_theta = 0.0;   // rad
  double beta = 1.0;          // linear

  void validate() const {
    if (!(std::abs(theta) < std::numbers::pi / 2)) throw ArgumentError("UserGeometry: |theta| must be < pi/2");
    if (!(delta_theta > 0.0)) throw ArgumentError("UserGeometry: delta_theta must be positive");
    if (!(beta > 0.0)) throw ArgumentError("UserGeometry: beta must be positive");
  }
};

/// Block-to-block temporal correlation: Clarke-Jakes J0(2 pi f_d T_b n) or
/// the exponential profile rho_1^n.
class TemporalModel {
 public:
  enum class Kind { kJakes, kExponential };

  static TemporalModel jakes(double fd_max_tb) {
    if (!(fd_max_tb >= 0.0) || !std::isfinite(fd_max_tb))
      throw ArgumentError("TemporalModel: f_d_max_Tb must be >= 0");
    return TemporalModel(Kind::kJakes, fd_max_tb);
  }
  static TemporalModel exponential(double rho1) {
    if (!(rho1 > 0.0 && rho1 <= 1.0)) throw ArgumentError("TemporalModel: rho_1 must be in (0, 1]");
    return TemporalModel(Kind::kExponential, rho1);
  }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  bool operator==(const TemporalModel&) const = default;

 private:
  TemporalModel(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

/// Gain-normalized large-scale spatial correlation (trace one).
struct SpatialCorrelation {
  HermitianMatrix matrix;
};

inline void require_antennas(std::size_t count) {
  if (count == 0) throw ArgumentError("antenna count must be >= 1");
}

/// Half-wavelength ULA response, element l = exp(-j pi l sin theta) / sqrt(L).
inline CVector steering_tx(double theta, std::size_t antennas) {
  require_antennas(antennas);
  const double scale = 1.0 / std::sqrt(static_cast<double>(antennas));
  const double phase = -std::numbers::pi * std::sin(theta);
  CVector a(static_cast<Eigen::Index>(antennas));
  for (std::size_t l = 0; l < antennas; ++l) a(static_cast<Eigen::Index>(l)) = std::polar(scale, phase * l);
  return a;
}

/// d/dtheta of steering_tx.
inline CVector steering_derivative(double theta, std::size_t antennas) {
  require_antennas(antennas);
  const double scale = 1.0 / std::sqrt(static_cast<double>(antennas));
  const double phase = -std::numbers::pi * std::sin(theta);
  const double c = std::cos(theta);
  CVector d(static_cast<Eigen::Index>(antennas));
  for (std::size_t l = 0; l < antennas; ++l) {
    const cd factor(0.0, -std::numbers::pi * static_cast<double>(l) * c);
    d(static_cast<Eigen::Index>(l)) = factor * std::polar(scale, phase * l);
  }
  return d;
}

/// One-ring correlation: integral of a(t) a(t)^H over the uniform angular
/// spectrum, by Gauss-Legendre quadrature.
inline SpatialCorrelation spatial_correlation(const UserGeometry& geom, std::size_t antennas,
                                              std::size_t quad_order = kDefaultQuadOrder) {
  geom.validate();
  require_antennas(antennas);
  if (quad_order < 8) throw ArgumentError("spatial_correlation: quad_order must be >= 8");

  // Rule on the offset interval: theta +- delta loses the width to
  // cancellation when delta is tiny.
  const QuadratureRule rule = gauss_legendre(quad_order, -geom.delta_theta, geom.delta_theta);
  const double density = 1.0 / (2.0 * geom.delta_theta);

  const auto n = static_cast<Eigen::Index>(antennas);
  CMatrix acc = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const CVector a = steering_tx(geom.theta + rule.nodes[i], antennas);
    acc.noalias() += (rule.weights[i] * density) * (a * a.adjoint());
  }

  HermitianMatrix r(acc);
  try {
    r = clamp_psd(r);
  } catch (const NotPsdError& e) {
    throw InternalError(std::string("spatial_correlation: quadrature produced a non-PSD matrix: ") + e.what());
  }
  if (std::abs(r.trace() - 1.0) > 1e-9) throw InternalError("spatial_correlation: trace deviates from 1");
  return {r};
}

/// Temporal correlation coefficient at block offset n.
inline double temporal_coeff(const TemporalModel& model, std::size_t n) {
  if (n == 0) return 1.0;
  switch (model.kind()) {
    case TemporalModel::Kind::kJakes:
      return bessel_j0(2.0 * std::numbers::pi * model.parameter() * static_cast<double>(n));
    case TemporalModel::Kind::kExponential:
      return std::pow(model.parameter(), static_cast<double>(n));
  }
  return 1.0;
}

/// h_n = rho_n h_1 + e, e ~ CN(0, beta (1 - rho_n^2) R), with the residual
/// sampler factored once for repeated draws.
class ChannelAger {
 public:
  ChannelAger(double rho_n, const SpatialCorrelation& spatial, double beta)
      : rho_(rho_n),
        residual_(check(rho_n, spatial) * (beta * (1.0 - rho_n * rho_n))),
        dim_(spatial.matrix.dim()) {}

  double rho() const noexcept { return rho_; }

  CVector operator()(const CVector& h1, RngStream& rng) const {
    if (h1.size() != dim_) throw ArgumentError("age_channel: dimension mismatch");
    if (rho_ == 1.0 || rho_ == -1.0) return rho_ * h1;
    return rho_ * h1 + residual_.draw(rng);
  }

 private:
  static const HermitianMatrix& check(double rho_n, const SpatialCorrelation& spatial) {
    if (std::abs(rho_n) > 1.0) throw ArgumentError("age_channel: |rho_n| must be <= 1");
    return spatial.matrix;
  }

  double rho_;
  ComplexGaussianSampler residual_;
  Eigen::Index dim_;
};

inline CVector age_channel(const CVector& h1, double rho_n, const SpatialCorrelation& spatial, double beta,
                           RngStream& rng) {
  return ChannelAger(rho_n, spatial, beta)(h1, rng);
}

}  // namespace dualscale

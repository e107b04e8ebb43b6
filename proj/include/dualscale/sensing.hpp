#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dualscale/channel.hpp"
#include "dualscale/errors.hpp"
#include "dualscale/numerics/hermitian.hpp"

namespace dualscale {

/// Echo parameters seen by the sensing receiver for one target.
struct SensingScene {
  cd alpha{1.0, 0.0};        // reflection coefficient
  double gain = 1.0;         // matched-filtering gain G (linear)
  std::size_t rx_antennas = 1;
  double noise = 1.0;        // sigma_r^2 (linear)

  void validate() const {
    if (!(gain > 0.0)) throw ArgumentError("SensingScene: G must be positive");
    if (rx_antennas == 0) throw ArgumentError("SensingScene: L_r must be >= 1");
    if (!(noise > 0.0)) throw ArgumentError("SensingScene: sigma_r2 must be positive");
  }
};

/// CRB(theta; T_l) = coefficient / T_l.
struct CrbModel {
  double coefficient = 0.0;  // rad^2 * time

  double crb(double sensing_time) const {
    if (!(sensing_time > 0.0)) return std::numeric_limits<double>::infinity();
    return coefficient / sensing_time;
  }
};

/// Fisher bracket of the angle with the complex amplitude treated as a
/// nuisance, for the matched transmit beam w = conj(a(theta)).
inline double fisher_bracket(double theta, std::size_t tx_antennas, std::size_t rx_antennas) {
  const CVector a = steering_tx(theta, tx_antennas);
  const CVector da = steering_derivative(theta, tx_antennas);
  const CVector b = steering_tx(theta, rx_antennas);
  const CVector db = steering_derivative(theta, rx_antennas);
  const CVector w = a.conjugate();

  // A w = b (a^T w);  (dA/dtheta) w = b' (a^T w) + b (a'^T w)
  const cd aw = a.transpose() * w;
  const cd daw = da.transpose() * w;
  const CVector x = b * aw;
  const CVector dx = db * aw + b * daw;

  const double tr_dd = dx.squaredNorm();         // tr(dA W dA^H)
  const cd tr_xd = dx.adjoint() * x;             // tr(A W dA^H)
  const double tr_xx = x.squaredNorm();          // tr(A W A^H)
  return tr_dd - std::norm(tr_xd) / tr_xx;
}

inline CrbModel crb_coefficient(const SensingScene& scene, double theta, std::size_t tx_antennas) {
  scene.validate();
  require_antennas(tx_antennas);
  const double bracket = fisher_bracket(theta, tx_antennas, scene.rx_antennas);
  if (!(bracket > 1e-15)) {
    throw DegenerateGeometryError("crb_coefficient: angle is unidentifiable (Fisher bracket " +
                                  std::to_string(bracket) + ")");
  }
  const double amp2 = scene.gain * static_cast<double>(scene.rx_antennas) *
                      static_cast<double>(tx_antennas) * std::norm(scene.alpha);
  if (!(amp2 > 0.0)) throw DegenerateGeometryError("crb_coefficient: zero reflection amplitude");
  return {scene.noise / (2.0 * amp2 * bracket)};
}

/// f'(theta) f'(theta)^H with f(theta) = sqrt(beta) a(theta).
inline HermitianMatrix error_direction(double theta, double beta, std::size_t tx_antennas) {
  const CVector fp = std::sqrt(beta) * steering_derivative(theta, tx_antennas);
  return HermitianMatrix::outer(fp);
}

/// Delta-method large-scale error: R_r = scale * direction.
struct LargeScaleError {
  HermitianMatrix direction;
  double scale = 0.0;

  HermitianMatrix covariance() const { return direction * scale; }
};

inline HermitianMatrix sensing_error_covariance(const HermitianMatrix& direction, double crb) {
  if (!(crb >= 0.0)) throw ArgumentError("sensing_error_covariance: crb must be >= 0");
  return direction * crb;
}

/// R_hat = beta R - R_r, clamped onto the PSD cone. Throws SensingTooCoarse
/// when an eigenvalue falls below -kPsdTolerance.
inline HermitianMatrix effective_correlation(double beta, const SpatialCorrelation& spatial,
                                             const HermitianMatrix& sensing_error) {
  if (spatial.matrix.dim() != sensing_error.dim())
    throw ArgumentError("effective_correlation: dimension mismatch");
  const HermitianMatrix raw = spatial.matrix * beta - sensing_error;
  try {
    return clamp_psd(raw);
  } catch (const NotPsdError& e) {
    throw SensingTooCoarse(
        "effective correlation is not PSD (min eigenvalue " + std::to_string(e.min_eigenvalue()) +
            "); sensing accuracy too coarse",
        e.min_eigenvalue());
  }
}

/// Per-user sensing inputs for the feasibility computation.
struct SensingUser {
  CrbModel crb;
  double beta = 1.0;
  SpatialCorrelation spatial;
  HermitianMatrix direction;
  double max_crb = 0.0;  // Gamma_k, rad^2
};

inline double effective_min_eigenvalue(const SensingUser& user, double sensing_time) {
  const HermitianMatrix raw = user.spatial.matrix * user.beta -
                              sensing_error_covariance(user.direction, user.crb.crb(sensing_time));
  return raw.min_eigenvalue();
}

/// Relative safety margin added to the bisected PSD threshold. Near the
/// threshold a 1e-6 relative change of T moves the minimum eigenvalue by a few
/// 1e-16, about the eigensolver round-off, so the margin keeps
/// every T >= T_psd on the feasible side.
inline constexpr double kPsdTimeMargin = 1e-6;

/// Smallest sensing time at which beta R - (c/T) f' f'^H is PSD within
/// kPsdTolerance. The minimum eigenvalue is non-decreasing in T, so the
/// threshold is bracketed and bisected to 1e-12 relative, then widened by
/// kPsdTimeMargin.
inline double psd_sensing_time(const SensingUser& user) {
  const double fnorm2 = user.direction.trace();
  if (!(fnorm2 > 0.0) || !(user.crb.coefficient > 0.0)) return 0.0;
  const auto feasible = [&](double t) { return effective_min_eigenvalue(user, t) >= -kPsdTolerance; };

  // Along f' the quadratic form is <= beta - crb |f'|^2, so this crb is infeasible.
  double lo = user.crb.coefficient * fnorm2 / (2.0 * (user.beta + kPsdTolerance));
  if (feasible(lo)) return lo;
  double hi = 2.0 * lo;
  for (int i = 0; i < 2000 && !feasible(hi); ++i) hi *= 2.0;
  if (!feasible(hi)) throw InternalError("psd_sensing_time: no feasible sensing time found");
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi * (1.0 + kPsdTimeMargin);
}

/// Minimum sensing duration meeting every CRB requirement and the PSD premise.
struct SensingRequirement {
  double min_time = 0.0;
  std::size_t binding_user = 0;
  std::vector<double> accuracy_time;  // c_k / Gamma_k
  std::vector<double> psd_time;       // T_psd,k
};

/// Computes T_l^min without the frame-length check.
inline SensingRequirement sensing_requirement(const std::vector<SensingUser>& users) {
  SensingRequirement req;
  for (std::size_t k = 0; k < users.size(); ++k) {
    const SensingUser& u = users[k];
    if (!(u.max_crb > 0.0)) throw ArgumentError("min_sensing_time: Gamma must be positive for every user");
    const double t_acc = u.crb.coefficient / u.max_crb;
    const double t_psd = psd_sensing_time(u);
    req.accuracy_time.push_back(t_acc);
    req.psd_time.push_back(t_psd);
    const double need = std::max(t_acc, t_psd);
    if (k == 0 || need > req.min_time) {
      req.min_time = need;
      req.binding_user = k;
    }
  }
  return req;
}

/// T_l^min; throws InfeasibleSensing if it exceeds the subframe length.
inline SensingRequirement min_sensing_time(const std::vector<SensingUser>& users, double frame_time) {
  SensingRequirement req = sensing_requirement(users);
  if (req.min_time > frame_time) {
    throw InfeasibleSensing("sensing requirement of user " + std::to_string(req.binding_user) +
                                " needs T_l >= " + std::to_string(req.min_time * 1e6) +
                                " us, longer than the subframe (" + std::to_string(frame_time * 1e6) + " us)",
                            req.binding_user, req.min_time);
  }
  return req;
}

}  // namespace dualscale

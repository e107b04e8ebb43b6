#pragma once

#include <cmath>
#include <cstddef>

#include "dualscale/errors.hpp"
#include "dualscale/numerics/hermitian.hpp"

namespace dualscale {

/// Orthogonal pilot burst of one small-scale update. Pilot energy
/// accumulates over the symbol count, so gamma_e = M_m P_m / sigma_m^2.
struct PilotConfig {
  std::size_t symbols = 1;  // M_m
  double power = 1.0;       // P_m (linear)
  double noise = 1.0;       // sigma_m^2 (linear)

  double snr() const { return static_cast<double>(symbols) * power / noise; }

  void validate() const {
    if (symbols == 0) throw ArgumentError("PilotConfig: M_m must be >= 1");
    if (!(power > 0.0)) throw ArgumentError("PilotConfig: P_m must be positive");
    if (!(noise > 0.0)) throw ArgumentError("PilotConfig: sigma_m2 must be positive");
  }
};

/// MMSE statistics for a prior R_hat and pilot SNR gamma_e.
struct EstimatorStats {
  HermitianMatrix c_h;  // covariance of the estimate
  HermitianMatrix c_e;  // error covariance
  CMatrix filter;       // R_hat (R_hat + I/gamma_e)^{-1}
};

/// With D = R_hat + I/gamma_e: filter = R_hat D^-1, C_e = R_hat D^-1 / gamma_e,
/// C_h = R_hat D^-1 R_hat. D is Hermitian positive definite for gamma_e > 0.
inline EstimatorStats mmse_stats(const HermitianMatrix& r_hat, double gamma_e) {
  if (!(gamma_e > 0.0)) throw ArgumentError("mmse_stats: gamma_e must be positive");
  const Eigen::Index n = r_hat.dim();
  const CMatrix d = r_hat.matrix() + CMatrix::Identity(n, n) / gamma_e;
  const Eigen::LLT<CMatrix> llt(d);
  if (llt.info() != Eigen::Success) throw InternalError("mmse_stats: R_hat + I/gamma_e is singular");
  // X = D^-1 R_hat, so R_hat D^-1 = X^H.
  const CMatrix x = llt.solve(r_hat.matrix());
  EstimatorStats s;
  s.filter = x.adjoint();
  s.c_e = HermitianMatrix(s.filter / gamma_e);
  s.c_h = HermitianMatrix(r_hat.matrix() * x);
  return s;
}

/// h_tilde = R_hat D^-1 y / (M_m sqrt(P_m)).
inline CVector estimate_channel(const CVector& y, const HermitianMatrix& r_hat, const PilotConfig& pilot) {
  pilot.validate();
  if (y.size() != r_hat.dim()) throw ArgumentError("estimate_channel: observation dimension mismatch");
  const EstimatorStats s = mmse_stats(r_hat, pilot.snr());
  return s.filter * y / (static_cast<double>(pilot.symbols) * std::sqrt(pilot.power));
}

/// tr(C_h) = tr(R_hat) + tr(D^-1)/gamma_e^2 - L/gamma_e.
inline double trace_c_h(const HermitianMatrix& r_hat, double gamma_e) {
  if (!(gamma_e > 0.0)) throw ArgumentError("trace_c_h: gamma_e must be positive");
  const Eigen::Index n = r_hat.dim();
  const CMatrix d = r_hat.matrix() + CMatrix::Identity(n, n) / gamma_e;
  const Eigen::LLT<CMatrix> llt(d);
  if (llt.info() != Eigen::Success) throw InternalError("trace_c_h: R_hat + I/gamma_e is singular");
  const double tr_inv = llt.solve(CMatrix::Identity(n, n)).diagonal().real().sum();
  return r_hat.trace() + tr_inv / (gamma_e * gamma_e) - static_cast<double>(n) / gamma_e;
}

/// Second-order Neumann-series surrogate for tr(D^-1)/gamma_e^2, compared
/// against the exact value. Diagnostic only.
struct NeumannDiagnostic {
  double exact = 0.0;
  double approximation = 0.0;
  double relative_error = 0.0;
};

inline NeumannDiagnostic neumann_diagnostic(const HermitianMatrix& r_hat, double gamma_e) {
  if (!(gamma_e > 0.0)) throw ArgumentError("neumann_diagnostic: gamma_e must be positive");
  const Eigen::Index n = r_hat.dim();
  const CMatrix d = r_hat.matrix() + CMatrix::Identity(n, n) / gamma_e;
  const double exact = d.inverse().diagonal().real().sum() / (gamma_e * gamma_e);
  const double approx = static_cast<double>(n) / gamma_e - r_hat.trace() + gamma_e * trace_product(r_hat, r_hat);
  NeumannDiagnostic out{exact, approx, 0.0};
  out.relative_error = exact != 0.0 ? std::abs(approx - exact) / std::abs(exact) : std::abs(approx);
  return out;
}

}  // namespace dualscale

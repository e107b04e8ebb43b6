#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "dualscale/errors.hpp"

namespace dualscale {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Eigenvalues below -kPsdTolerance mark a matrix as not PSD; those in
/// [-kPsdTolerance, 0) are treated as round-off and clamped to zero.
inline constexpr double kPsdTolerance = 1e-10;

/// Dense complex Hermitian matrix. Construction symmetrizes the input so
/// that entry (p,q) is bit-exactly conj of entry (q,p) and the diagonal is
/// real. Immutable afterwards.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const CMatrix& m) : m_(symmetrized(m)) {}

  static HermitianMatrix zero(Eigen::Index dim) { return HermitianMatrix(CMatrix::Zero(dim, dim)); }
  static HermitianMatrix identity(Eigen::Index dim) {
    return HermitianMatrix(CMatrix::Identity(dim, dim));
  }
  static HermitianMatrix outer(const CVector& v) { return HermitianMatrix(v * v.adjoint()); }

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  cd operator()(Eigen::Index p, Eigen::Index q) const { return m_(p, q); }

  double trace() const { return m_.diagonal().real().sum(); }
  double frobenius_norm() const { return m_.norm(); }

  /// Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  double min_eigenvalue() const { return dim() == 0 ? 0.0 : eigenvalues()(0); }
  /// Spectral norm (largest |eigenvalue|).
  double spectral_norm() const {
    if (dim() == 0) return 0.0;
    const Eigen::VectorXd ev = eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }

  HermitianMatrix operator+(const HermitianMatrix& o) const { return HermitianMatrix(m_ + o.m_); }
  HermitianMatrix operator-(const HermitianMatrix& o) const { return HermitianMatrix(m_ - o.m_); }
  HermitianMatrix operator*(double s) const { return HermitianMatrix(m_ * s); }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& h) { return h * s; }

 private:
  static CMatrix symmetrized(const CMatrix& m) {
    if (m.rows() != m.cols()) throw ArgumentError("HermitianMatrix: matrix is not square");
    CMatrix out(m.rows(), m.cols());
    for (Eigen::Index q = 0; q < m.cols(); ++q) {
      out(q, q) = cd(m(q, q).real(), 0.0);
      for (Eigen::Index p = q + 1; p < m.rows(); ++p) {
        const cd v = 0.5 * (m(p, q) + std::conj(m(q, p)));
        out(p, q) = v;
        out(q, p) = std::conj(v);
      }
    }
    return out;
  }

  CMatrix m_;
};

/// Real trace of the product of two Hermitian matrices, tr(A B).
inline double trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  // tr(AB) = sum_pq A(p,q) B(q,p) = sum_pq A(p,q) conj(B(p,q))
  return (a.matrix().array() * b.matrix().array().conjugate()).real().sum();
}

/// Projects onto the PSD cone after checking that no eigenvalue is below
/// -tolerance. Throws NotPsdError otherwise.
inline HermitianMatrix clamp_psd(const HermitianMatrix& m, double tolerance = kPsdTolerance) {
  if (m.dim() == 0) return m;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev(0) < -tolerance) {
    throw NotPsdError("matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(ev(0)) + ")",
                      ev(0));
  }
  if (ev(0) >= 0.0) return m;
  const Eigen::VectorXd clamped = ev.cwiseMax(0.0);
  return HermitianMatrix(es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint());
}

/// Square-root factor S with S S^H = m, from the eigendecomposition.
/// Negative eigenvalues within tolerance are clamped; below it NotPsdError.
inline CMatrix psd_sqrt(const HermitianMatrix& m, double tolerance = kPsdTolerance) {
  if (m.dim() == 0) return CMatrix(0, 0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev(0) < -tolerance) {
    throw NotPsdError("covariance is not positive semidefinite (min eigenvalue " +
                          std::to_string(ev(0)) + ")",
                      ev(0));
  }
  // Eigenvalues at round-off level relative to the largest are zeroed;
  // otherwise their square roots (~1e-8) leak outside the true support.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(ev(ev.size() - 1), 0.0);
  const Eigen::VectorXd root = ev.unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
  return es.eigenvectors() * root.asDiagonal();
}

/// ||a - b||_F / ||b||_F, or ||a||_F when b is zero.
inline double relative_frobenius_error(const CMatrix& a, const CMatrix& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

}  // namespace dualscale

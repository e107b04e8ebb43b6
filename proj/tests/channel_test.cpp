#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dualscale/channel.hpp"

using namespace dualscale;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

CMatrix riemann_correlation(const UserGeometry& g, std::size_t L, int points) {
  const double a = g.theta - g.delta_theta;
  const double h = 2.0 * g.delta_theta / points;
  CMatrix acc = CMatrix::Zero(L, L);
  for (int i = 0; i < points; ++i) {
    const CVector v = steering_tx(a + (i + 0.5) * h, L);
    acc += v * v.adjoint();
  }
  return acc / static_cast<double>(points);
}

}  // namespace

TEST(Steering, Examples) {
  const CVector a = steering_tx(0.0, 4);
  for (int l = 0; l < 4; ++l) EXPECT_NEAR(std::abs(a(l) - cd(0.5, 0.0)), 0.0, 1e-15);
  const CVector b = steering_tx(std::numbers::pi / 2, 2);
  EXPECT_NEAR(std::abs(b(0) - cd(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b(1) - cd(-1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
  for (double t : {-1.3, -0.2, 0.0, 0.7, 1.5})
    for (std::size_t L : {1u, 3u, 8u, 33u}) EXPECT_NEAR(steering_tx(t, L).norm(), 1.0, 1e-12);
  EXPECT_THROW(steering_tx(0.1, 0), ArgumentError);
}

TEST(Steering, DerivativeExamples) {
  EXPECT_EQ(steering_derivative(0.4, 1).norm(), 0.0);
  EXPECT_NEAR(steering_derivative(std::numbers::pi / 2, 8).norm(), 0.0, 1e-14);
  EXPECT_THROW(steering_derivative(0.1, 0), ArgumentError);
}

TEST(Steering, DerivativeMatchesFiniteDifference) {
  for (double t : {0.3, -0.9, 1.1}) {
    const double h = 1e-6;
    const CVector fd = (steering_tx(t + h, 8) - steering_tx(t - h, 8)) / (2 * h);
    const CVector d = steering_derivative(t, 8);
    for (int l = 0; l < 8; ++l) EXPECT_LE(std::abs(fd(l) - d(l)), 1e-6) << t << " " << l;
  }
}

TEST(SpatialCorrelation, MatchesRiemannOracle) {
  const UserGeometry g{20 * kDeg, 1 * kDeg, 1.0};
  const SpatialCorrelation r = spatial_correlation(g, 8);
  const CMatrix oracle = riemann_correlation(g, 8, 100000);
  EXPECT_LE((r.matrix.matrix() - oracle).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SpatialCorrelation, TraceOneAndPsd) {
  for (double th : {-60.0, -30.0, 0.0, 45.0, 80.0})
    for (double d : {0.1, 1.0, 5.0}) {
      const SpatialCorrelation r = spatial_correlation({th * kDeg, d * kDeg, 2.0}, 8);
      EXPECT_NEAR(r.matrix.trace(), 1.0, 1e-9);
      EXPECT_GE(r.matrix.min_eigenvalue(), -1e-12);
    }
}

TEST(SpatialCorrelation, PointSpectrumLimit) {
  const UserGeometry g{0.4, 1e-9, 1.0};
  const SpatialCorrelation r = spatial_correlation(g, 8);
  const auto ev = r.matrix.eigenvalues();
  EXPECT_LE(ev(ev.size() - 2), 1e-6);
  const CVector a = steering_tx(0.4, 8);
  EXPECT_LE((r.matrix.matrix() - a * a.adjoint()).norm(), 1e-6);
}

TEST(SpatialCorrelation, StableUnderQuadratureRefinement) {
  for (double d : {0.5, 1.0, 5.0}) {
    const UserGeometry g{-25 * kDeg, d * kDeg, 1.0};
    const CMatrix a = spatial_correlation(g, 8, 64).matrix.matrix();
    const CMatrix b = spatial_correlation(g, 8, 128).matrix.matrix();
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SpatialCorrelation, Errors) {
  EXPECT_THROW(spatial_correlation({0.0, 0.0, 1.0}, 8), ArgumentError);
  EXPECT_THROW(spatial_correlation({2.0, 0.01, 1.0}, 8), ArgumentError);
  EXPECT_THROW(spatial_correlation({0.0, 0.01, 1.0}, 8, 4), ArgumentError);
}

TEST(Temporal, Coefficients) {
  const auto e = TemporalModel::exponential(0.98);
  const auto j = TemporalModel::jakes(0.05);
  EXPECT_EQ(temporal_coeff(e, 0), 1.0);
  EXPECT_EQ(temporal_coeff(j, 0), 1.0);
  EXPECT_DOUBLE_EQ(temporal_coeff(e, 1), 0.98);
  for (std::size_t n = 1; n < 40; ++n) EXPECT_LT(temporal_coeff(e, n), temporal_coeff(e, n - 1));
  // J0(0.3 pi) from the series.
  const double x = 0.3 * std::numbers::pi;
  double term = 1, sum = 1;
  for (int k = 1; k < 40; ++k) {
    term *= -(x * x / 4) / (k * k);
    sum += term;
  }
  EXPECT_NEAR(temporal_coeff(j, 3), sum, 1e-10);
  EXPECT_THROW(TemporalModel::exponential(0.0), ArgumentError);
  EXPECT_THROW(TemporalModel::exponential(1.5), ArgumentError);
  EXPECT_THROW(TemporalModel::jakes(-0.1), ArgumentError);
}

TEST(Aging, NoAgingIsIdentity) {
  const SpatialCorrelation r = spatial_correlation({0.2, 1 * kDeg, 1.0}, 8);
  RngStream rng(9, 0);
  const CVector h = ComplexGaussianSampler(r.matrix).draw(rng);
  EXPECT_EQ(age_channel(h, 1.0, r, 1.0, rng), h);
  EXPECT_THROW(age_channel(h, 1.01, r, 1.0, rng), ArgumentError);
}

TEST(Aging, FullyAgedCovariance) {
  const double beta = 1.7;
  const SpatialCorrelation r = spatial_correlation({-0.5, 3 * kDeg, beta}, 8);
  RngStream rng(9, 1);
  const ChannelAger ager(0.0, r, beta);
  const CVector zero = CVector::Zero(8);
  CMatrix cov = CMatrix::Zero(8, 8);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const CVector x = ager(zero, rng);
    cov += x * x.adjoint();
  }
  cov /= n;
  EXPECT_LE(relative_frobenius_error(cov, beta * r.matrix.matrix()), 0.05);
}

TEST(Aging, AutocorrelationAndMarginal) {
  const double beta = 0.8;
  const SpatialCorrelation r = spatial_correlation({0.6, 2 * kDeg, beta}, 8);
  const double rho = temporal_coeff(TemporalModel::exponential(0.98), 10);
  const ComplexGaussianSampler initial(r.matrix * beta);
  const ChannelAger ager(rho, r, beta);
  RngStream rng(17, 0);
  CMatrix cross = CMatrix::Zero(8, 8), marginal = CMatrix::Zero(8, 8);
  CVector mean = CVector::Zero(8);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const CVector h1 = initial.draw(rng);
    const CVector hn = ager(h1, rng);
    cross += hn * h1.adjoint();
    marginal += hn * hn.adjoint();
    mean += h1;
  }
  cross /= n;
  marginal /= n;
  mean /= n;
  EXPECT_LE(mean.norm(), 0.02 * std::sqrt(beta));
  EXPECT_LE(relative_frobenius_error(cross, rho * beta * r.matrix.matrix()), 0.05);
  EXPECT_LE(relative_frobenius_error(marginal, beta * r.matrix.matrix()), 0.05);
}
